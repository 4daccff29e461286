#include "occpred/core.hpp"

#include <array>

namespace occpred {

bool is_symmetric_psd(double xx, double xy, double yx, double yy) {
  if (!std::isfinite(xx) || !std::isfinite(xy) || !std::isfinite(yx) || !std::isfinite(yy)) {
    return false;
  }
  if (std::abs(xy - yx) > kPsdTolerance) {
    return false;
  }
  const double off = 0.5 * (xy + yx);
  const double mid = 0.5 * (xx + yy);
  const double rad = std::hypot(0.5 * (xx - yy), off);
  return mid - rad >= -kPsdTolerance;
}

Cov2::Cov2(double xx_, double xy_, double yx_, double yy_) : xx(xx_), xy(xy_), yx(yx_), yy(yy_) {
  if (!is_symmetric_psd(xx, xy, yx, yy)) {
    throw std::invalid_argument("Cov2: matrix is not symmetric positive semi-definite");
  }
}

std::string to_string(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::Front:
      return "front";
    case ObstacleKind::SideLeft:
      return "side_left";
    case ObstacleKind::SideRight:
      return "side_right";
    case ObstacleKind::Fused:
      return "fused";
  }
  return "unknown";
}

ObstacleKind obstacle_kind_from_string(const std::string& name) {
  static const std::array<ObstacleKind, 4> kinds{ObstacleKind::Front, ObstacleKind::SideLeft,
                                                 ObstacleKind::SideRight, ObstacleKind::Fused};
  for (auto k : kinds) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown obstacle kind '" + name + "'");
}

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* key) {
    if (!ok) throw std::invalid_argument(std::string("invalid pipeline config value for '") + key + "'");
  };
  require(epsilon > 0.0, "epsilon");
  require(obstacle_clearance >= 0.0, "obstacle_clearance");
  require(window_duration > 0.0, "window_duration");
  require(avg_turn_trigger >= 0.0, "avg_turn_trigger");
  require(max_turn_trigger >= 0.0, "max_turn_trigger");
  require(min_motion_speed >= 0.0, "min_motion_speed");
  require(max_ray > 0.0, "max_ray");
  require(n_sectors >= 3, "n_sectors");
  require(assoc_radius > 0.0, "assoc_radius");
  require(c1 > 1.0, "c1");
  require(c2 > 0.0, "c2");
  require(cost_floor > 0.0 && cost_floor < cost_ceiling, "cost_floor");
  require(cost_ceiling <= 1.0, "cost_ceiling");
  require(decay_rate >= 0.0, "decay_rate");
  require(retention >= 0.0, "retention");
  require(max_sample_gap > 0.0, "max_sample_gap");
  require(self_reaction_radius >= 0.0, "self_reaction_radius");
  for (std::size_t i = 0; i < 7; ++i) {
    require(q_base[i] >= 0.0, "q_base");
    require(r_base[i] >= 0.0, "r_base");
    require(p_init[i] > 0.0, "p_init");
  }
}

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("wrap_angle: non-finite angle");
  }
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Cov2 rotate_cov(const Cov2& c, double theta) {
  if (!is_symmetric_psd(c.xx, c.xy, c.yx, c.yy)) {
    throw std::invalid_argument("rotate_cov: input is not symmetric positive semi-definite");
  }
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  // M = R C
  const double m00 = cs * c.xx - sn * c.yx;
  const double m01 = cs * c.xy - sn * c.yy;
  const double m10 = sn * c.xx + cs * c.yx;
  const double m11 = sn * c.xy + cs * c.yy;
  // M R^T
  const double xx = m00 * cs - m01 * sn;
  const double xy = m00 * sn + m01 * cs;
  const double yx = m10 * cs - m11 * sn;
  const double yy = m10 * sn + m11 * cs;
  const double off = 0.5 * (xy + yx);
  return {xx, off, off, yy};
}

}  // namespace occpred
