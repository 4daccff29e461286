#include <gtest/gtest.h>

#include <sstream>

#include "occpred/episode_io.hpp"

namespace occpred {
namespace {

EpisodeLog sample_log(std::uint64_t seed = 5, int ticks = 40) {
  SimConfig cfg;
  return run_episode(generate_scenario(seed, cfg), cfg, ticks);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::size_t failing_record(const std::string& text) {
  std::istringstream in(text);
  try {
    read_episode_log(in);
  } catch (const LogFormatError& e) {
    return e.record();
  }
  return static_cast<std::size_t>(-1);
}

TEST(EpisodeIo, RoundTripIsExact) {
  const EpisodeLog log = sample_log();
  std::ostringstream out;
  write_episode_log(out, log);
  std::istringstream in(out.str());
  const EpisodeLog back = read_episode_log(in);

  EXPECT_EQ(back.initial.seed, log.initial.seed);
  ASSERT_EQ(back.initial.agents.size(), log.initial.agents.size());
  for (std::size_t i = 0; i < log.initial.agents.size(); ++i) {
    EXPECT_EQ(back.initial.agents[i].position, log.initial.agents[i].position);
    EXPECT_EQ(back.initial.agents[i].preferred_speed, log.initial.agents[i].preferred_speed);
    EXPECT_EQ(back.initial.agents[i].heading, log.initial.agents[i].heading);
  }
  ASSERT_EQ(back.ticks.size(), log.ticks.size());
  for (std::size_t k = 0; k < log.ticks.size(); ++k) {
    const auto& a = log.ticks[k];
    const auto& b = back.ticks[k];
    EXPECT_EQ(a.time, b.time);
    EXPECT_EQ(a.scan.ranges, b.scan.ranges);
    EXPECT_EQ(a.scan.angles, b.scan.angles);
    ASSERT_EQ(a.observations.size(), b.observations.size());
    for (std::size_t i = 0; i < a.observations.size(); ++i) {
      EXPECT_EQ(a.observations[i].agent_id, b.observations[i].agent_id);
      EXPECT_EQ(a.observations[i].position, b.observations[i].position);
      EXPECT_EQ(a.observations[i].velocity, b.observations[i].velocity);
    }
  }
  EXPECT_EQ(sim_config_to_json(back.config), sim_config_to_json(log.config));

  std::ostringstream again;
  write_episode_log(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(EpisodeIo, TruncationReportsRecordIndex) {
  std::ostringstream out;
  write_episode_log(out, sample_log());
  auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), 41u);

  // A record cut mid-line.
  auto cut = lines;
  cut[20] = cut[20].substr(0, cut[20].size() / 2);
  cut.resize(21);
  EXPECT_EQ(failing_record(join(cut)), 20u);

  // Whole records missing at the end.
  auto short_log = lines;
  short_log.resize(30);
  EXPECT_EQ(failing_record(join(short_log)), 30u);

  // Records out of order.
  auto swapped = lines;
  std::swap(swapped[3], swapped[4]);
  EXPECT_EQ(failing_record(join(swapped)), 3u);

  EXPECT_EQ(failing_record(""), 0u);
}

TEST(EpisodeIo, SchemaMismatchIsDistinct) {
  std::ostringstream out;
  write_episode_log(out, sample_log(1, 3));
  std::string text = out.str();
  const std::string from = kEpisodeSchema;
  text.replace(text.find(from), from.size(), "occpred.episode/99");
  std::istringstream in(text);
  EXPECT_THROW(read_episode_log(in), SchemaMismatch);
}

TEST(EpisodeIo, BadHeaderConfigIsFormatError) {
  std::ostringstream out;
  write_episode_log(out, sample_log(1, 3));
  auto lines = lines_of(out.str());
  auto header = nlohmann::json::parse(lines[0]);
  header["sim"]["n_rays"] = -4;
  lines[0] = header.dump();
  EXPECT_EQ(failing_record(join(lines)), 0u);
}

TEST(EpisodeIo, UnevenScanIsRejectedOnWrite) {
  EpisodeLog log = sample_log(2, 2);
  log.ticks[1].scan.angles[3] += 1e-3;
  std::ostringstream out;
  EXPECT_THROW(write_episode_log(out, log), std::invalid_argument);
}

TEST(EpisodeIo, PublishedRecordFields) {
  CostedObstacle e;
  e.obstacle.mean = {1.5, -0.5};
  e.obstacle.cov = {0.3, 0.15, 0.15, 0.3};
  e.obstacle.t_occ = 4.0;
  e.cost = 0.25;
  e.expires_at = 9.0;
  e.track_id = 12;
  e.contributors = {3, 4};
  const auto j = published_record(7, 0.7, {e});
  EXPECT_EQ(j.at("tick"), 7);
  ASSERT_EQ(j.at("obstacles").size(), 1u);
  const auto& o = j.at("obstacles")[0];
  EXPECT_EQ(o.at("track_id"), 12);
  EXPECT_EQ(o.at("mean")[0].get<double>(), 1.5);
  EXPECT_EQ(o.at("cov")[1].get<double>(), 0.15);
  EXPECT_EQ(o.at("contributors"), nlohmann::json::array({3, 4}));
}

}  // namespace
}  // namespace occpred
