#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occpred/core.hpp"
#include "occpred/crowd_sim.hpp"
#include "occpred/occlusion_map.hpp"

namespace occpred {

enum class Category { Agent = 0, Obstacle = 1, Incorrect = 2, Unseen = 3 };
inline constexpr std::size_t kCategoryCount = 4;

std::string to_string(Category c);

enum class ErrorMode { Center, Boundary };

struct EvalConfig {
  double incorrect_threshold = 0.40;
  /// Published predictions are scored on every `score_every`-th tick.
  int score_every = 1;
  /// Ignore the agents whose reactions produced a prediction when looking for its nearest entity.
  bool exclude_source_agents = true;
  ErrorMode error_mode = ErrorMode::Center;
  double bin_width = 0.5;
  int n_bins = 6;

  void validate() const;
};

enum class EntityKind { Agent, Obstacle };

struct Entity {
  EntityKind kind = EntityKind::Obstacle;
  AgentId agent_id = -1;  ///< agents only
  Vec2 center;
  double radius = 0.2;
  bool visible = false;
};

struct GroundTruth {
  std::vector<Entity> entities;
};

/// Entities of a world snapshot with their visibility from the robot.
GroundTruth ground_truth_from(const Scenario& world, double max_ray);

struct NearestEntity {
  double error = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> index;  ///< into GroundTruth::entities; empty for an empty world
};

NearestEntity prediction_error(Vec2 mean, const GroundTruth& truth, std::span<const AgentId> exclude = {},
                               ErrorMode mode = ErrorMode::Center);

Category classify(const NearestEntity& nearest, const GroundTruth& truth, const EvalConfig& cfg);

struct ScoredPrediction {
  CostedObstacle prediction;
  double error = 0.0;
  Category category = Category::Incorrect;
  double robot_distance = 0.0;
  int tick = 0;
  std::uint64_t seed = 0;
};

ScoredPrediction score_prediction(const CostedObstacle& prediction, const GroundTruth& truth, Vec2 robot,
                                  int tick, std::uint64_t seed, const EvalConfig& cfg);

struct BinRow {
  double lo = 0.0;
  double hi = 0.0;
  std::array<std::size_t, kCategoryCount> counts{};
  std::size_t n = 0;

  /// Percentage of the row in a category; NaN when the row is empty.
  double percent(Category c) const;
};

struct DistanceBinReport {
  std::vector<BinRow> rows;
  std::size_t out_of_range = 0;  ///< predictions at or beyond the last bin edge
};

/// Half-open bins [lo, hi) of width cfg.bin_width; the last bin also includes its upper edge.
DistanceBinReport bin_report(std::span<const ScoredPrediction> scored, const EvalConfig& cfg = {});

struct ScatterRecord {
  double cost = 0.0;
  double error = 0.0;
  Category category = Category::Incorrect;
  double robot_distance = 0.0;
};

struct CostDecile {
  double lo = 0.0;
  double hi = 0.0;
  std::array<std::size_t, kCategoryCount> counts{};
  std::array<double, kCategoryCount> mean_error{};  ///< NaN where count is zero
};

struct ScatterData {
  std::vector<ScatterRecord> records;
  std::vector<CostDecile> deciles;  ///< ten equal-width cost bins over [0, 1]
};

ScatterData scatter_data(std::span<const ScoredPrediction> scored);

struct TrialResult {
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::size_t raw_predictions = 0;
  std::size_t cleared_predictions = 0;
  std::vector<ScoredPrediction> scored;
};

/// Runs the pipeline over a recorded episode and scores the published map.
TrialResult evaluate_episode(const EpisodeLog& log, const PipelineConfig& pipeline, const EvalConfig& eval);

struct ExperimentConfig {
  PipelineConfig pipeline;
  SimConfig sim;
  EvalConfig eval;
  int workers = 0;  ///< 0 = available hardware parallelism

  void validate() const;
};

struct AggregateSummary {
  std::size_t seeds = 0;
  std::size_t failed_seeds = 0;
  std::size_t total_predictions = 0;
  std::size_t raw_predictions = 0;
  std::size_t cleared_predictions = 0;
  std::array<std::size_t, kCategoryCount> category_counts{};
  std::array<double, kCategoryCount> mean_error{};  ///< NaN where count is zero
  double mean_unseen_error = 0.0;
  std::vector<double> incorrect_rate_by_bin;  ///< percent, NaN for empty bins
};

struct AggregateReport {
  std::vector<TrialResult> trials;  ///< in seed order
  DistanceBinReport bins;
  ScatterData scatter;
  AggregateSummary summary;
};

/// Aggregates per-seed results in order.
AggregateReport aggregate(std::vector<TrialResult> trials, const EvalConfig& eval);

/// Seeds first_seed .. first_seed + n_seeds - 1, each generated, simulated and scored on a
/// bounded worker pool. A seed that fails to generate is recorded and skipped.
AggregateReport run_trials(int n_seeds, const ExperimentConfig& cfg, std::uint64_t first_seed = 0);

/// Scenario, episode and scoring for one seed.
TrialResult run_trial(std::uint64_t seed, const ExperimentConfig& cfg);

}  // namespace occpred
