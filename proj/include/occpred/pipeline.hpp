#pragma once

#include <map>
#include <vector>

#include "occpred/core.hpp"
#include "occpred/fusion.hpp"
#include "occpred/noisy_predictor.hpp"
#include "occpred/occlusion_map.hpp"
#include "occpred/sensor_clearing.hpp"

namespace occpred {

struct TickOutput {
  std::size_t raw_predictions = 0;
  std::size_t cleared_predictions = 0;
  FrameStats fusion;
  std::vector<CostedObstacle> published;
};

/// Stateful predict -> clear -> fuse -> publish chain for one robot. Single writer: call tick()
/// from one thread; published snapshots may be copied out freely.
class OcclusionPipeline {
 public:
  explicit OcclusionPipeline(PipelineConfig cfg);

  TickOutput tick(const LidarScan& scan, const std::vector<AgentObservation>& observations, double now);

  const PipelineConfig& config() const { return cfg_; }
  const std::vector<FusionTrack>& tracks() const { return tracks_; }
  const OcclusionMap& map() const { return map_; }

 private:
  PipelineConfig cfg_;
  std::map<AgentId, TrajectoryWindow> windows_;
  std::vector<FusionTrack> tracks_;
  TrackId next_id_ = 0;
  OcclusionMap map_;
};

}  // namespace occpred
