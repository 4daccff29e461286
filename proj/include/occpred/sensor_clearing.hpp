#pragma once

#include <vector>

#include "occpred/core.hpp"

namespace occpred {

struct Pose2 {
  Vec2 position;
  double heading = 0.0;
};

/// 360 degree planar scan. Angles are world-frame radians; a ray with no return reads max_ray.
struct LidarScan {
  Pose2 robot_pose;
  std::vector<double> angles;
  std::vector<double> ranges;
  double stamp = 0.0;

  /// Throws std::invalid_argument if sizes differ or any range lies outside (0, max_ray].
  void validate(double max_ray) const;
};

/// Per-sector mean range and its neighbour-averaged clearing threshold.
struct SectorProfile {
  int n_sectors = 0;
  double max_ray = 0.0;
  std::vector<double> ray_value;
  std::vector<double> threshold;
  /// Sectors that received no rays; their ray_value falls back to max_ray.
  std::vector<bool> empty;

  /// Sector containing a world-frame bearing; bins are half-open [lo, hi) starting at 0 rad.
  int sector_of(double angle) const;
};

SectorProfile build_sector_profile(const LidarScan& scan, const PipelineConfig& cfg);

/// Keeps the obstacles whose range d from the robot satisfies threshold[sector] <= d < max_ray.
std::vector<GaussianObstacle> clear_obstacles(const std::vector<GaussianObstacle>& obstacles,
                                              const SectorProfile& profile, Vec2 robot_position);

/// Single-point form of the retention test used by clear_obstacles.
bool survives_clearing(Vec2 point, const SectorProfile& profile, Vec2 robot_position);

}  // namespace occpred
