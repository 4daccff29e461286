#include "occpred/noisy_predictor.hpp"

#include <algorithm>
#include <limits>

namespace occpred {

namespace {
constexpr double kTimeTolerance = 1e-9;
}

TrajectoryWindow::TrajectoryWindow(AgentId id, double duration, double max_gap)
    : id_(id), duration_(duration), max_gap_(max_gap) {
  if (!(duration > 0.0)) throw std::invalid_argument("TrajectoryWindow: duration must be positive");
  if (!(max_gap > 0.0)) throw std::invalid_argument("TrajectoryWindow: max_gap must be positive");
}

void TrajectoryWindow::push(const AgentObservation& obs) {
  if (obs.agent_id != id_) {
    throw std::invalid_argument("TrajectoryWindow: observation for agent " + std::to_string(obs.agent_id) +
                                " pushed into window of agent " + std::to_string(id_));
  }
  if (!samples_.empty() && !(obs.t > samples_.back().t)) {
    throw std::invalid_argument("TrajectoryWindow: timestamps must strictly increase");
  }
  if (!samples_.empty() && obs.t - samples_.back().t > max_gap_ + kTimeTolerance) samples_.clear();
  samples_.push_back(obs);
  while (obs.t - samples_.front().t > duration_ + kTimeTolerance) {
    samples_.pop_front();
  }
}

double guarded_heading(Vec2 velocity, double epsilon) { return std::atan2(velocity.y, velocity.x + epsilon); }

TurnStats turn_stats(const TrajectoryWindow& window, const PipelineConfig& cfg) {
  const auto& s = window.samples();
  if (s.size() < 2) {
    throw InsufficientData("turn_stats: window of agent " + std::to_string(window.agent_id()) +
                           " has fewer than 2 samples");
  }

  TurnStats out;
  double abs_sum = 0.0;
  double signed_sum = 0.0;
  double max_turn = 0.0;
  double speed_sum = s.front().velocity.norm();
  for (std::size_t k = 1; k < s.size(); ++k) {
    const Vec2 v_prev = s[k - 1].velocity;
    const Vec2 v_now = s[k].velocity;
    speed_sum += v_now.norm();
    if (v_prev.norm() < cfg.min_motion_speed || v_now.norm() < cfg.min_motion_speed) continue;
    const double turn =
        wrap_angle(guarded_heading(v_now, cfg.epsilon) - guarded_heading(v_prev, cfg.epsilon));
    abs_sum += std::abs(turn);
    signed_sum += turn;
    max_turn = std::max(max_turn, std::abs(turn));
  }
  const auto steps = static_cast<double>(s.size() - 1);
  out.avg_turning_angle = abs_sum / steps;
  out.max_turning_angle = max_turn;
  out.turn_sign = signed_sum >= 0.0 ? TurnSign::CCW : TurnSign::CW;
  out.avg_speed = speed_sum / static_cast<double>(s.size());
  out.heading_now = guarded_heading(s.back().velocity, cfg.epsilon);
  out.heading_prev = guarded_heading(s.front().velocity, cfg.epsilon);

  const Vec2 v_t = s[s.size() - 1].velocity;
  const Vec2 v_tm1 = s[s.size() - 2].velocity;
  const double dvx = v_t.x - v_tm1.x;
  out.gradient_m = dvx == 0.0 ? std::numeric_limits<double>::infinity() : (v_t.y - v_tm1.y) / dvx;
  return out;
}

bool is_triggered(const TurnStats& stats, const PipelineConfig& cfg) {
  return stats.avg_turning_angle >= cfg.avg_turn_trigger && stats.max_turning_angle >= cfg.max_turn_trigger;
}

double patch_threshold(double avg_speed) { return avg_speed < 0.2 ? 1.5 * avg_speed : 0.3; }

double patch_angle(const TurnStats& stats, PatchKind kind) {
  // atan(+inf) is pi/2, the limit of a vertical gradient.
  const double base = std::atan(stats.gradient_m);
  if (kind == PatchKind::Front) return base + kPi / 4.0 - stats.signed_turning();
  return base - kPi / 4.0;
}

Cov2 build_patch_cov(const TurnStats& stats, PatchKind kind, const PipelineConfig& /*cfg*/) {
  const double thresh = patch_threshold(stats.avg_speed);
  const Cov2 base{thresh, thresh / 2.0, thresh / 2.0, thresh};
  return rotate_cov(base, patch_angle(stats, kind));
}

double front_distance(double turning, const PipelineConfig& cfg) {
  return std::abs(cfg.obstacle_clearance / (std::tan(turning) + cfg.epsilon));
}

double side_radius(double step_displacement, double turning, const PipelineConfig& cfg) {
  return step_displacement / (std::abs(turning) + cfg.epsilon);
}

GaussianObstacle predict_front(const TrajectoryWindow& window, const TurnStats& stats,
                               const PipelineConfig& cfg) {
  if (window.size() < 2) throw InsufficientData("predict_front: window has fewer than 2 samples");
  if (!(stats.avg_speed > 0.0)) {
    throw NoFrontPrediction("predict_front: zero average speed leaves the occupancy time undefined");
  }
  // The avoided region lies ahead of where the agent was before it turned.
  const auto& now = window.latest();
  const auto& before = window.oldest();
  const double relative = std::clamp(front_distance(stats.signed_turning(), cfg), 0.0, cfg.max_ray);
  const double alpha = guarded_heading(before.velocity, cfg.epsilon);

  GaussianObstacle g;
  g.mean = before.position + relative * Vec2{std::cos(alpha), std::sin(alpha)};
  g.cov = build_patch_cov(stats, PatchKind::Front, cfg);
  g.t_occ = now.t + relative / stats.avg_speed;
  g.kind = ObstacleKind::Front;
  g.source_agent = window.agent_id();
  g.created_at = now.t;
  return g;
}

std::vector<GaussianObstacle> predict_sides(const TrajectoryWindow& window, const TurnStats& stats,
                                            const PipelineConfig& cfg) {
  const auto& s = window.samples();
  if (s.size() < 2) throw InsufficientData("predict_sides: window has fewer than 2 samples");
  const auto& now = s.back();
  const auto& prev = s[s.size() - 2];

  const double d_s = distance(now.position, prev.position);
  const double radius = side_radius(d_s, stats.signed_turning(), cfg);
  if (radius > cfg.max_ray) return {};

  const Vec2 v = now.velocity;
  const double beta = std::atan2(-v.x, v.y + cfg.epsilon);
  const Vec2 offset = radius * Vec2{std::cos(beta), std::sin(beta)};
  const Cov2 cov = build_patch_cov(stats, PatchKind::Side, cfg);

  std::vector<GaussianObstacle> out;
  out.reserve(2);
  for (const Vec2 center : {now.position + offset, now.position - offset}) {
    GaussianObstacle g;
    g.mean = center;
    g.cov = cov;
    g.t_occ = now.t;
    g.kind = cross(v, center - now.position) > 0.0 ? ObstacleKind::SideLeft : ObstacleKind::SideRight;
    g.source_agent = window.agent_id();
    g.created_at = now.t;
    out.push_back(g);
  }
  return out;
}

std::vector<GaussianObstacle> predict_window(const TrajectoryWindow& window, const PipelineConfig& cfg) {
  if (window.size() < 2) return {};
  const TurnStats stats = turn_stats(window, cfg);
  if (!is_triggered(stats, cfg)) return {};

  std::vector<GaussianObstacle> out;
  if (stats.avg_speed > 0.0) out.push_back(predict_front(window, stats, cfg));
  auto sides = predict_sides(window, stats, cfg);
  out.insert(out.end(), sides.begin(), sides.end());
  return out;
}

}  // namespace occpred
