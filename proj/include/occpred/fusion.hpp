#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "occpred/core.hpp"
#include "occpred/kd_tree.hpp"

namespace occpred {

using Vector7 = Eigen::Matrix<double, 7, 1>;
using Matrix7 = Eigen::Matrix<double, 7, 7>;
using TrackId = std::uint64_t;

/// State layout: [dt, c_xx, c_xy, c_yx, c_yy, x, y]. dt is the remaining time until occupancy,
/// measured from `reference_time`.
struct FusionTrack {
  Vector7 x = Vector7::Zero();
  Matrix7 P = Matrix7::Identity();
  double last_update = 0.0;     ///< time of the most recent init or correction
  double last_predict = 0.0;    ///< time the covariance was last propagated to
  double reference_time = 0.0;  ///< origin of x[0]
  double created_at = 0.0;
  TrackId track_id = 0;
  std::vector<AgentId> contributors;  ///< sorted, unique
  int n_measurements = 0;

  Vec2 position() const { return {x(5), x(6)}; }
  Cov2 shape() const { return {x(1), x(2), x(3), x(4)}; }
  double t_occ() const { return reference_time + x(0); }
};

/// Stacks an estimate into the state layout, with dt taken relative to `reference_time`.
Vector7 to_state(const GaussianObstacle& obs, double reference_time);

/// Timestamp-dependent multiplier for process and measurement noise: c1 - exp(-c2 * dt^2).
double covariance_scale(double t_occ, double now, const PipelineConfig& cfg);

FusionTrack init_track(const GaussianObstacle& obs, double now, const PipelineConfig& cfg, TrackId id = 0);

/// Moves the origin of x[0] to `now` so the remaining time counts down between frames.
FusionTrack rereference(FusionTrack track, double now);

/// Identity transition: the mean is untouched, P grows by scale * elapsed * Q_base.
/// Throws std::invalid_argument if `now` precedes the last propagation.
FusionTrack predict_step(FusionTrack track, double now, const PipelineConfig& cfg);

/// Sequential identity-observation updates, one per measurement, in the given order.
FusionTrack correct_step(FusionTrack track, const std::vector<GaussianObstacle>& measurements, double now,
                         const PipelineConfig& cfg);

/// KD-tree over a frame's cleared estimates.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<GaussianObstacle> obstacles);

  const std::vector<GaussianObstacle>& obstacles() const { return obstacles_; }
  bool empty() const { return obstacles_.empty(); }

  /// Indices of estimates within `radius` of `position`, nearest first.
  std::vector<KdTree2::Hit> query(Vec2 position, double radius) const;

 private:
  std::vector<GaussianObstacle> obstacles_;
  KdTree2 tree_;
};

std::vector<GaussianObstacle> gather_measurements(const SpatialIndex& index, Vec2 position,
                                                  const PipelineConfig& cfg);

struct FrameStats {
  std::size_t corrections = 0;
  std::size_t spawned = 0;
};

/// One fusion frame. Every track is re-referenced and predicted to `now`; each estimate
/// corrects at most its nearest in-radius track (ties to the lower id); leftovers seed new
/// tracks numbered from `next_id`.
std::vector<FusionTrack> fuse_frame(std::vector<FusionTrack> tracks,
                                    const std::vector<GaussianObstacle>& cleared, double now,
                                    const PipelineConfig& cfg, TrackId& next_id, FrameStats* stats = nullptr);

/// Smallest eigenvalue of the symmetric part of P.
double min_eigenvalue(const Matrix7& P);

}  // namespace occpred
