#include "occpred/episode_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "occpred/config_io.hpp"

namespace occpred {

namespace {

using nlohmann::json;

json vec(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json scenario_to_json(const Scenario& s) {
  json j;
  j["seed"] = s.seed;
  j["time"] = s.time;
  j["robot"] = {s.robot.position.x, s.robot.position.y, s.robot.heading};
  j["robot_radius"] = s.robot_radius;
  j["bounds"] = {s.bounds.min_x, s.bounds.min_y, s.bounds.max_x, s.bounds.max_y};
  j["obstacles"] = json::array();
  for (const auto& o : s.static_obstacles) j["obstacles"].push_back({o.center.x, o.center.y, o.radius});
  j["agents"] = json::array();
  for (const auto& a : s.agents) {
    j["agents"].push_back({{"id", a.id},
                           {"position", vec(a.position)},
                           {"velocity", vec(a.velocity)},
                           {"goal", vec(a.goal)},
                           {"preferred_speed", a.preferred_speed},
                           {"radius", a.radius},
                           {"heading", a.heading}});
  }
  return j;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.time = j.at("time").get<double>();
  const auto& r = j.at("robot");
  s.robot = {{r.at(0).get<double>(), r.at(1).get<double>()}, r.at(2).get<double>()};
  s.robot_radius = j.at("robot_radius").get<double>();
  const auto& b = j.at("bounds");
  s.bounds = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
  for (const auto& o : j.at("obstacles")) {
    s.static_obstacles.push_back({{o.at(0).get<double>(), o.at(1).get<double>()}, o.at(2).get<double>()});
  }
  for (const auto& a : j.at("agents")) {
    SimAgent g;
    g.id = a.at("id").get<AgentId>();
    g.position = vec_from(a.at("position"));
    g.velocity = vec_from(a.at("velocity"));
    g.goal = vec_from(a.at("goal"));
    g.preferred_speed = a.at("preferred_speed").get<double>();
    g.radius = a.at("radius").get<double>();
    g.heading = a.at("heading").get<double>();
    s.agents.push_back(g);
  }
  return s;
}

json tick_to_json(const TickRecord& t) {
  const auto& pose = t.scan.robot_pose;
  const int n = static_cast<int>(t.scan.angles.size());
  for (int i = 0; i < n; ++i) {
    if (t.scan.angles[static_cast<std::size_t>(i)] != ray_angle(pose, i, n)) {
      throw std::invalid_argument("write_episode_log: tick " + std::to_string(t.tick) +
                                  " has a scan that is not evenly spaced from the robot heading");
    }
  }
  json j;
  j["type"] = "tick";
  j["tick"] = t.tick;
  j["time"] = t.time;
  j["scan"] = {{"stamp", t.scan.stamp},
               {"pose", {pose.position.x, pose.position.y, pose.heading}},
               {"ranges", t.scan.ranges}};
  j["observations"] = json::array();
  for (const auto& o : t.observations) {
    j["observations"].push_back({o.agent_id, o.t, o.position.x, o.position.y, o.velocity.x, o.velocity.y});
  }
  j["agents"] = json::array();
  for (const auto& a : t.agents) {
    j["agents"].push_back({a.id, a.position.x, a.position.y, a.velocity.x, a.velocity.y});
  }
  return j;
}

TickRecord tick_from_json(const json& j) {
  if (j.at("type").get<std::string>() != "tick") throw std::invalid_argument("expected a tick record");
  TickRecord t;
  t.tick = j.at("tick").get<int>();
  t.time = j.at("time").get<double>();
  const auto& scan = j.at("scan");
  const auto& pose = scan.at("pose");
  t.scan.stamp = scan.at("stamp").get<double>();
  t.scan.robot_pose = {{pose.at(0).get<double>(), pose.at(1).get<double>()}, pose.at(2).get<double>()};
  t.scan.ranges = scan.at("ranges").get<std::vector<double>>();
  const int n = static_cast<int>(t.scan.ranges.size());
  t.scan.angles.reserve(t.scan.ranges.size());
  for (int i = 0; i < n; ++i) t.scan.angles.push_back(ray_angle(t.scan.robot_pose, i, n));
  for (const auto& o : j.at("observations")) {
    t.observations.push_back({o.at(0).get<AgentId>(),
                              o.at(1).get<double>(),
                              {o.at(2).get<double>(), o.at(3).get<double>()},
                              {o.at(4).get<double>(), o.at(5).get<double>()}});
  }
  for (const auto& a : j.at("agents")) {
    t.agents.push_back({a.at(0).get<AgentId>(),
                        {a.at(1).get<double>(), a.at(2).get<double>()},
                        {a.at(3).get<double>(), a.at(4).get<double>()}});
  }
  return t;
}

}  // namespace

nlohmann::json sim_config_to_json(const SimConfig& cfg) {
  ExperimentConfig e;
  e.sim = cfg;
  return config_to_json(e).at("sim");
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  ExperimentConfig e;
  const json flat = j.flatten();
  for (const auto& [pointer, value] : flat.items()) {
    std::string key = "sim" + pointer;
    std::replace(key.begin(), key.end(), '/', '.');
    apply_override(e, key, value.dump());
  }
  validate_config(e);
  return e.sim;
}

void write_episode_log(std::ostream& out, const EpisodeLog& log) {
  json header;
  header["type"] = "header";
  header["schema"] = kEpisodeSchema;
  header["seed"] = log.initial.seed;
  header["n_ticks"] = log.ticks.size();
  header["sim"] = sim_config_to_json(log.config);
  header["scenario"] = scenario_to_json(log.initial);
  out << header.dump() << '\n';
  for (const auto& t : log.ticks) out << tick_to_json(t).dump() << '\n';
  if (!out) throw std::runtime_error("write_episode_log: stream write failed");
}

EpisodeLog read_episode_log(std::istream& in) {
  EpisodeLog log;
  std::string line;
  std::size_t index = 0;
  std::size_t expected = 0;
  bool have_header = false;

  auto parse = [&](const std::string& text) {
    try {
      return json::parse(text);
    } catch (const json::exception& ex) {
      throw LogFormatError(index, std::string("invalid JSON (") + ex.what() + ")");
    }
  };

  while (std::getline(in, line)) {
    if (line.empty()) throw LogFormatError(index, "empty record");
    const json j = parse(line);
    if (!have_header) {
      if (!j.is_object() || j.value("type", "") != "header") throw LogFormatError(index, "missing header record");
      const std::string schema = j.value("schema", "");
      if (schema != kEpisodeSchema) {
        throw SchemaMismatch("episode log schema '" + schema + "' is not supported (expected '" +
                             kEpisodeSchema + "')");
      }
      try {
        expected = j.at("n_ticks").get<std::size_t>();
        log.config = sim_config_from_json(j.at("sim"));
        log.initial = scenario_from_json(j.at("scenario"));
      } catch (const std::exception& ex) {
        throw LogFormatError(index, std::string("bad header: ") + ex.what());
      }
      have_header = true;
    } else {
      TickRecord t;
      try {
        t = tick_from_json(j);
      } catch (const std::exception& ex) {
        throw LogFormatError(index, std::string("bad tick record: ") + ex.what());
      }
      if (t.tick != static_cast<int>(log.ticks.size())) {
        throw LogFormatError(index, "tick " + std::to_string(t.tick) + " out of sequence");
      }
      log.ticks.push_back(std::move(t));
    }
    ++index;
  }
  if (!have_header) throw LogFormatError(0, "empty log");
  if (log.ticks.size() != expected) {
    throw LogFormatError(index, "log truncated: header announces " + std::to_string(expected) +
                                    " tick records, found " + std::to_string(log.ticks.size()));
  }
  return log;
}

nlohmann::json published_record(int tick, double time, const std::vector<CostedObstacle>& published) {
  json j;
  j["tick"] = tick;
  j["time"] = time;
  j["obstacles"] = json::array();
  for (const auto& e : published) {
    const auto& c = e.obstacle.cov;
    j["obstacles"].push_back({{"track_id", e.track_id},
                              {"mean", vec(e.obstacle.mean)},
                              {"cov", {c.xx, c.xy, c.yx, c.yy}},
                              {"t_occ", e.obstacle.t_occ},
                              {"cost", e.cost},
                              {"expires_at", e.expires_at},
                              {"contributors", e.contributors}});
  }
  return j;
}

}  // namespace occpred
