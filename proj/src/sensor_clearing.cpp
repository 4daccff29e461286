#include "occpred/sensor_clearing.hpp"

#include <algorithm>
#include <stdexcept>

namespace occpred {

void LidarScan::validate(double max_ray) const {
  if (angles.size() != ranges.size()) {
    throw std::invalid_argument("LidarScan: angle and range counts differ");
  }
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (!std::isfinite(angles[i])) throw std::invalid_argument("LidarScan: non-finite angle");
    if (!(ranges[i] > 0.0 && ranges[i] <= max_ray)) {
      throw std::invalid_argument("LidarScan: range " + std::to_string(i) + " outside (0, max_ray]");
    }
  }
}

int SectorProfile::sector_of(double angle) const {
  const double two_pi = 2.0 * kPi;
  double a = std::fmod(angle, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a = 0.0;
  const int idx = static_cast<int>(std::floor(a / (two_pi / n_sectors)));
  return std::clamp(idx, 0, n_sectors - 1);
}

SectorProfile build_sector_profile(const LidarScan& scan, const PipelineConfig& cfg) {
  scan.validate(cfg.max_ray);
  const int n = cfg.n_sectors;
  SectorProfile p;
  p.n_sectors = n;
  p.max_ray = cfg.max_ray;
  p.ray_value.assign(n, 0.0);
  p.threshold.assign(n, 0.0);
  p.empty.assign(n, false);

  std::vector<int> counts(n, 0);
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const int s = p.sector_of(scan.angles[i]);
    p.ray_value[s] += scan.ranges[i];
    ++counts[s];
  }
  for (int s = 0; s < n; ++s) {
    if (counts[s] == 0) {
      p.ray_value[s] = cfg.max_ray;
      p.empty[s] = true;
    } else {
      p.ray_value[s] /= counts[s];
    }
  }
  for (int s = 0; s < n; ++s) {
    const double left = p.ray_value[(s + n - 1) % n];
    const double right = p.ray_value[(s + 1) % n];
    p.threshold[s] = (left + p.ray_value[s] + right) / 3.0;
  }
  return p;
}

bool survives_clearing(Vec2 point, const SectorProfile& profile, Vec2 robot_position) {
  const Vec2 rel = point - robot_position;
  const double d = rel.norm();
  const int s = profile.sector_of(std::atan2(rel.y, rel.x));
  return d >= profile.threshold[s] && d < profile.max_ray;
}

std::vector<GaussianObstacle> clear_obstacles(const std::vector<GaussianObstacle>& obstacles,
                                              const SectorProfile& profile, Vec2 robot_position) {
  std::vector<GaussianObstacle> kept;
  kept.reserve(obstacles.size());
  std::copy_if(obstacles.begin(), obstacles.end(), std::back_inserter(kept),
               [&](const GaussianObstacle& g) { return survives_clearing(g.mean, profile, robot_position); });
  return kept;
}

}  // namespace occpred
