#include "occpred/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "occpred/pipeline.hpp"

namespace occpred {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(Category c) {
  switch (c) {
    case Category::Agent:
      return "agent";
    case Category::Obstacle:
      return "obstacle";
    case Category::Incorrect:
      return "incorrect";
    case Category::Unseen:
      return "unseen";
  }
  return "unknown";
}

void EvalConfig::validate() const {
  auto require = [](bool ok, const char* key) {
    if (!ok) throw std::invalid_argument(std::string("invalid eval config value for '") + key + "'");
  };
  require(incorrect_threshold > 0.0, "incorrect_threshold");
  require(score_every >= 1, "score_every");
  require(bin_width > 0.0, "bin_width");
  require(n_bins >= 1, "n_bins");
}

void ExperimentConfig::validate() const {
  pipeline.validate();
  sim.validate();
  eval.validate();
  if (workers < 0) throw std::invalid_argument("invalid run config value for 'workers'");
}

GroundTruth ground_truth_from(const Scenario& world, double max_ray) {
  GroundTruth gt;
  gt.entities.reserve(world.static_obstacles.size() + world.agents.size());
  for (std::size_t i = 0; i < world.static_obstacles.size(); ++i) {
    const auto& o = world.static_obstacles[i];
    Entity e;
    e.kind = EntityKind::Obstacle;
    e.center = o.center;
    e.radius = o.radius;
    e.visible = is_visible(world, o.center, max_ray, i, std::nullopt);
    gt.entities.push_back(e);
  }
  for (const auto& a : world.agents) {
    Entity e;
    e.kind = EntityKind::Agent;
    e.agent_id = a.id;
    e.center = a.position;
    e.radius = a.radius;
    e.visible = is_visible(world, a.position, max_ray, std::nullopt, a.id);
    gt.entities.push_back(e);
  }
  return gt;
}

NearestEntity prediction_error(Vec2 mean, const GroundTruth& truth, std::span<const AgentId> exclude,
                               ErrorMode mode) {
  NearestEntity best;
  for (std::size_t i = 0; i < truth.entities.size(); ++i) {
    const Entity& e = truth.entities[i];
    if (e.kind == EntityKind::Agent && std::find(exclude.begin(), exclude.end(), e.agent_id) != exclude.end()) {
      continue;
    }
    double d = distance(mean, e.center);
    if (mode == ErrorMode::Boundary) d = std::max(0.0, d - e.radius);
    if (d < best.error) {
      best.error = d;
      best.index = i;
    }
  }
  return best;
}

Category classify(const NearestEntity& nearest, const GroundTruth& truth, const EvalConfig& cfg) {
  if (!nearest.index || nearest.error > cfg.incorrect_threshold) return Category::Incorrect;
  const Entity& e = truth.entities[*nearest.index];
  if (!e.visible) return Category::Unseen;
  return e.kind == EntityKind::Agent ? Category::Agent : Category::Obstacle;
}

ScoredPrediction score_prediction(const CostedObstacle& prediction, const GroundTruth& truth, Vec2 robot,
                                  int tick, std::uint64_t seed, const EvalConfig& cfg) {
  std::span<const AgentId> exclude;
  if (cfg.exclude_source_agents) exclude = prediction.contributors;
  const NearestEntity nearest = prediction_error(prediction.obstacle.mean, truth, exclude, cfg.error_mode);
  ScoredPrediction s;
  s.prediction = prediction;
  s.error = nearest.error;
  s.category = classify(nearest, truth, cfg);
  s.robot_distance = distance(prediction.obstacle.mean, robot);
  s.tick = tick;
  s.seed = seed;
  return s;
}

double BinRow::percent(Category c) const {
  if (n == 0) return kNaN;
  return 100.0 * static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(n);
}

DistanceBinReport bin_report(std::span<const ScoredPrediction> scored, const EvalConfig& cfg) {
  DistanceBinReport r;
  for (int i = 0; i < cfg.n_bins; ++i) {
    BinRow row;
    row.lo = cfg.bin_width * i;
    row.hi = cfg.bin_width * (i + 1);
    r.rows.push_back(row);
  }
  const double top = cfg.bin_width * cfg.n_bins;
  for (const auto& s : scored) {
    if (!(s.robot_distance >= 0.0) || s.robot_distance > top) {
      ++r.out_of_range;
      continue;
    }
    auto idx = static_cast<std::size_t>(std::floor(s.robot_distance / cfg.bin_width));
    idx = std::min(idx, r.rows.size() - 1);
    ++r.rows[idx].counts[static_cast<std::size_t>(s.category)];
    ++r.rows[idx].n;
  }
  return r;
}

ScatterData scatter_data(std::span<const ScoredPrediction> scored) {
  ScatterData d;
  d.records.reserve(scored.size());
  std::array<std::array<double, kCategoryCount>, 10> sums{};
  d.deciles.resize(10);
  for (std::size_t i = 0; i < 10; ++i) {
    d.deciles[i].lo = static_cast<double>(i) / 10.0;
    d.deciles[i].hi = static_cast<double>(i + 1) / 10.0;
  }
  for (const auto& s : scored) {
    d.records.push_back({s.prediction.cost, s.error, s.category, s.robot_distance});
    // Compare against the stored edges so a cost of exactly 0.3 lands in [0.3, 0.4).
    std::size_t bin = 0;
    while (bin + 1 < d.deciles.size() && s.prediction.cost >= d.deciles[bin + 1].lo) ++bin;
    const auto c = static_cast<std::size_t>(s.category);
    ++d.deciles[bin].counts[c];
    sums[bin][c] += s.error;
  }
  for (std::size_t b = 0; b < 10; ++b) {
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      const auto n = d.deciles[b].counts[c];
      d.deciles[b].mean_error[c] = n == 0 ? kNaN : sums[b][c] / static_cast<double>(n);
    }
  }
  return d;
}

TrialResult evaluate_episode(const EpisodeLog& log, const PipelineConfig& pipeline, const EvalConfig& eval) {
  TrialResult r;
  r.seed = log.initial.seed;
  OcclusionPipeline p(pipeline);
  for (const auto& tick : log.ticks) {
    const TickOutput out = p.tick(tick.scan, tick.observations, tick.time);
    r.raw_predictions += out.raw_predictions;
    r.cleared_predictions += out.cleared_predictions;
    if (tick.tick % eval.score_every != 0 || out.published.empty()) continue;
    const Scenario world = world_at(log, tick);
    const GroundTruth truth = ground_truth_from(world, pipeline.max_ray);
    for (const auto& e : out.published) {
      r.scored.push_back(score_prediction(e, truth, world.robot.position, tick.tick, r.seed, eval));
    }
  }
  return r;
}

TrialResult run_trial(std::uint64_t seed, const ExperimentConfig& cfg) {
  try {
    const Scenario scenario = generate_scenario(seed, cfg.sim);
    const EpisodeLog log = run_episode(scenario, cfg.sim, cfg.sim.horizon_ticks);
    return evaluate_episode(log, cfg.pipeline, cfg.eval);
  } catch (const std::exception& ex) {
    TrialResult r;
    r.seed = seed;
    r.ok = false;
    r.error = ex.what();
    return r;
  }
}

AggregateReport aggregate(std::vector<TrialResult> trials, const EvalConfig& eval) {
  AggregateReport rep;
  std::vector<ScoredPrediction> all;
  AggregateSummary& s = rep.summary;
  s.seeds = trials.size();
  for (const auto& t : trials) {
    if (!t.ok) ++s.failed_seeds;
    s.raw_predictions += t.raw_predictions;
    s.cleared_predictions += t.cleared_predictions;
    all.insert(all.end(), t.scored.begin(), t.scored.end());
  }
  s.total_predictions = all.size();
  std::array<double, kCategoryCount> sums{};
  for (const auto& p : all) {
    const auto c = static_cast<std::size_t>(p.category);
    ++s.category_counts[c];
    sums[c] += p.error;
  }
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    s.mean_error[c] = s.category_counts[c] == 0 ? kNaN : sums[c] / static_cast<double>(s.category_counts[c]);
  }
  s.mean_unseen_error = s.mean_error[static_cast<std::size_t>(Category::Unseen)];
  rep.bins = bin_report(all, eval);
  for (const auto& row : rep.bins.rows) s.incorrect_rate_by_bin.push_back(row.percent(Category::Incorrect));
  rep.scatter = scatter_data(all);
  rep.trials = std::move(trials);
  return rep;
}

AggregateReport run_trials(int n_seeds, const ExperimentConfig& cfg, std::uint64_t first_seed) {
  if (n_seeds < 1) throw std::invalid_argument("run_trials: n_seeds must be at least 1");
  cfg.validate();
  const auto n = static_cast<std::size_t>(n_seeds);
  std::vector<TrialResult> results(n);

  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(n));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) results[i] = run_trial(first_seed + i, cfg);
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return aggregate(std::move(results), cfg.eval);
}

}  // namespace occpred
