#include "occpred/pipeline.hpp"

#include <algorithm>
#include <unordered_set>

namespace occpred {

OcclusionPipeline::OcclusionPipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

TickOutput OcclusionPipeline::tick(const LidarScan& scan, const std::vector<AgentObservation>& observations,
                                   double now) {
  TickOutput out;

  const Vec2 robot = scan.robot_pose.position;
  auto near_robot = [&](const TrajectoryWindow& w) {
    return std::any_of(w.samples().begin(), w.samples().end(), [&](const AgentObservation& s) {
      return distance(s.position, robot) < cfg_.self_reaction_radius;
    });
  };

  std::vector<GaussianObstacle> raw;
  for (const auto& obs : observations) {
    auto [it, inserted] = windows_.try_emplace(obs.agent_id, obs.agent_id, cfg_.window_duration, cfg_.max_sample_gap);
    it->second.push(obs);
    if (near_robot(it->second)) continue;
    auto predictions = predict_window(it->second, cfg_);
    raw.insert(raw.end(), predictions.begin(), predictions.end());
  }
  out.raw_predictions = raw.size();

  const SectorProfile profile = build_sector_profile(scan, cfg_);
  const auto cleared = clear_obstacles(raw, profile, robot);
  out.cleared_predictions = cleared.size();

  if (cfg_.clear_tracks) {
    std::erase_if(tracks_, [&](const FusionTrack& t) { return !survives_clearing(t.position(), profile, robot); });
  }
  tracks_ = fuse_frame(std::move(tracks_), cleared, now, cfg_, next_id_, &out.fusion);
  map_.update(tracks_, now, cfg_);

  std::unordered_set<TrackId> live;
  for (const auto& e : map_.entries()) live.insert(e.track_id);
  std::erase_if(tracks_, [&](const FusionTrack& t) { return !live.contains(t.track_id); });

  out.published = map_.snapshot();
  return out;
}

}  // namespace occpred
