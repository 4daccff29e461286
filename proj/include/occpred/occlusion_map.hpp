#pragma once

#include <vector>

#include "occpred/core.hpp"
#include "occpred/fusion.hpp"

namespace occpred {

struct CostedObstacle {
  GaussianObstacle obstacle;
  double cost = 0.0;
  double expires_at = 0.0;
  TrackId track_id = 0;
  std::vector<AgentId> contributors;
};

/// Planner-facing cost for a region expected to be occupied at t_occ.
///
/// Before the occupancy time the cost is 1 / (1 + remaining), clamped to [floor, ceiling]; after
/// it the cost decays linearly from the ceiling at `decay_rate` per second down to the floor.
double cost_of(double t_occ, double now, const PipelineConfig& cfg);

/// Time at which a region's post-occupancy decay reaches the floor.
double floor_reached_at(double t_occ, const PipelineConfig& cfg);

/// One entry per live track; tracks past their expiry are skipped.
std::vector<CostedObstacle> publish(const std::vector<FusionTrack>& tracks, double now, const PipelineConfig& cfg);

/// Drops expired entries and entries that have sat at the floor for longer than the retention horizon.
std::vector<CostedObstacle> prune(std::vector<CostedObstacle> map, double now, const PipelineConfig& cfg);

bool is_live(const CostedObstacle& entry, double now, const PipelineConfig& cfg);

/// Holds the latest published frame. Readers receive a full snapshot copy.
class OcclusionMap {
 public:
  void update(const std::vector<FusionTrack>& tracks, double now, const PipelineConfig& cfg) {
    entries_ = prune(publish(tracks, now, cfg), now, cfg);
  }
  const std::vector<CostedObstacle>& entries() const { return entries_; }
  std::vector<CostedObstacle> snapshot() const { return entries_; }

 private:
  std::vector<CostedObstacle> entries_;
};

}  // namespace occpred
