#include "occpred/occlusion_map.hpp"

#include <algorithm>
#include <limits>

namespace occpred {

double cost_of(double t_occ, double now, const PipelineConfig& cfg) {
  const double remaining = t_occ - now;
  if (remaining > 0.0) {
    return std::clamp(1.0 / (1.0 + remaining), cfg.cost_floor, cfg.cost_ceiling);
  }
  return std::max(cfg.cost_floor, cfg.cost_ceiling - cfg.decay_rate * (now - t_occ));
}

double floor_reached_at(double t_occ, const PipelineConfig& cfg) {
  if (cfg.decay_rate <= 0.0) return std::numeric_limits<double>::infinity();
  return t_occ + (cfg.cost_ceiling - cfg.cost_floor) / cfg.decay_rate;
}

bool is_live(const CostedObstacle& entry, double now, const PipelineConfig& cfg) {
  if (now > entry.expires_at) return false;
  return now - floor_reached_at(entry.obstacle.t_occ, cfg) <= cfg.retention;
}

std::vector<CostedObstacle> publish(const std::vector<FusionTrack>& tracks, double now, const PipelineConfig& cfg) {
  std::vector<CostedObstacle> out;
  out.reserve(tracks.size());
  for (const auto& t : tracks) {
    CostedObstacle e;
    e.obstacle.mean = t.position();
    e.obstacle.cov = t.shape();
    e.obstacle.t_occ = t.t_occ();
    e.obstacle.kind = ObstacleKind::Fused;
    e.obstacle.created_at = t.created_at;
    e.cost = cost_of(e.obstacle.t_occ, now, cfg);
    e.expires_at = std::max(e.obstacle.t_occ, t.last_update) + cfg.retention;
    e.track_id = t.track_id;
    e.contributors = t.contributors;
    if (now > e.expires_at) continue;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CostedObstacle> prune(std::vector<CostedObstacle> map, double now, const PipelineConfig& cfg) {
  std::erase_if(map, [&](const CostedObstacle& e) { return !is_live(e, now, cfg); });
  return map;
}

}  // namespace occpred
