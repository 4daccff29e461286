#pragma once

#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "occpred/core.hpp"

namespace occpred {

/// Raised when a trajectory window holds too few samples to derive turning statistics.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a front prediction is requested for an agent that is not moving.
class NoFrontPrediction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sliding window over one agent's recent observations.
class TrajectoryWindow {
 public:
  TrajectoryWindow() = default;
  /// `max_gap` bounds the time between consecutive samples; a longer gap (the agent was out of
  /// sight) restarts the window so no turning step spans it.
  TrajectoryWindow(AgentId id, double duration,
                   double max_gap = std::numeric_limits<double>::infinity());

  /// Appends a sample and evicts everything older than `duration` before it.
  /// Throws std::invalid_argument on a foreign agent id or non-increasing time.
  void push(const AgentObservation& obs);

  AgentId agent_id() const { return id_; }
  double duration() const { return duration_; }
  double max_gap() const { return max_gap_; }
  const std::deque<AgentObservation>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const AgentObservation& latest() const { return samples_.back(); }
  const AgentObservation& oldest() const { return samples_.front(); }

 private:
  AgentId id_ = 0;
  double duration_ = 1.0;
  double max_gap_ = std::numeric_limits<double>::infinity();
  std::deque<AgentObservation> samples_;
};

enum class TurnSign { CW, CCW };

struct TurnStats {
  double avg_turning_angle = 0.0;
  double max_turning_angle = 0.0;
  TurnSign turn_sign = TurnSign::CCW;
  double avg_speed = 0.0;
  double heading_now = 0.0;
  double heading_prev = 0.0;
  /// Slope of the velocity change between the last two samples; +inf when v_x did not change.
  double gradient_m = 0.0;

  /// Average turning angle carrying the dominant turn direction.
  double signed_turning() const {
    return turn_sign == TurnSign::CCW ? avg_turning_angle : -avg_turning_angle;
  }
};

/// Heading used throughout the predictor: atan2(v_y, v_x + eps).
double guarded_heading(Vec2 velocity, double epsilon);

TurnStats turn_stats(const TrajectoryWindow& window, const PipelineConfig& cfg);

bool is_triggered(const TurnStats& stats, const PipelineConfig& cfg);

/// Diagonal magnitude of the unrotated patch: 1.5 * speed below 0.2 m/s, else 0.3.
double patch_threshold(double avg_speed);

enum class PatchKind { Front, Side };

/// Orientation applied to the base patch for the given obstacle kind.
double patch_angle(const TurnStats& stats, PatchKind kind);

Cov2 build_patch_cov(const TurnStats& stats, PatchKind kind, const PipelineConfig& cfg);

/// Unclamped distance from the trigger position to the avoided region.
double front_distance(double turning, const PipelineConfig& cfg);

/// Unclamped radius to the instantaneous centre of rotation.
double side_radius(double step_displacement, double turning, const PipelineConfig& cfg);

GaussianObstacle predict_front(const TrajectoryWindow& window, const TurnStats& stats,
                               const PipelineConfig& cfg);

std::vector<GaussianObstacle> predict_sides(const TrajectoryWindow& window, const TurnStats& stats,
                                            const PipelineConfig& cfg);

/// Front and side estimates for a window, or nothing when the window is not triggered.
std::vector<GaussianObstacle> predict_window(const TrajectoryWindow& window, const PipelineConfig& cfg);

}  // namespace occpred
