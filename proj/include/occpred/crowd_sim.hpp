#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "occpred/core.hpp"
#include "occpred/sensor_clearing.hpp"

namespace occpred {

/// Raised when rejection sampling cannot place every entity without overlap.
class ScenarioTooDense : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Circle {
  Vec2 center;
  double radius = 0.2;
};

struct Bounds {
  double min_x = -4.0;
  double min_y = -4.0;
  double max_x = 4.0;
  double max_y = 4.0;

  bool contains(Vec2 p, double margin = 0.0) const {
    return p.x >= min_x + margin && p.x <= max_x - margin && p.y >= min_y + margin && p.y <= max_y - margin;
  }
};

struct SimAgent {
  AgentId id = 0;
  Vec2 position;
  Vec2 velocity;
  Vec2 goal;
  double preferred_speed = 1.0;
  double radius = 0.2;
  double heading = 0.0;  ///< kept across stops so steering is continuous
};

struct Scenario {
  std::vector<Circle> static_obstacles;
  std::vector<SimAgent> agents;
  Pose2 robot;
  double robot_radius = 0.2;
  Bounds bounds;
  std::uint64_t seed = 0;
  double time = 0.0;
};

struct SimConfig {
  double dt = 0.1;
  double max_ray = 3.0;
  int n_rays = 360;
  int horizon_ticks = 300;

  Bounds bounds;
  Pose2 robot{{0.0, 0.0}, 0.0};
  double robot_radius = 0.2;
  double obstacle_radius = 0.2;
  double agent_radius = 0.2;

  int min_agents = 4;
  int max_agents = 8;
  int min_obstacles = 3;
  int max_obstacles = 6;
  double min_speed = 0.4;
  double max_speed = 1.2;
  double min_goal_distance = 3.0;
  double placement_gap = 0.3;     ///< extra free space between placed footprints
  int max_placement_attempts = 2000;

  // Reaction model. An entity blocks a heading when the ray along it enters the entity's footprint
  // inflated by both radii plus `clearance_margin` within `lookahead` meters.
  double lookahead = 0.1;
  double clearance_margin = 0.15;
  double heading_resolution = 0.02;  ///< rad, spacing of candidate headings
  double avoid_turn_rate = 8.0;      ///< rad/s while the current heading is blocked
  double goal_turn_rate = 2.5;       ///< rad/s otherwise
  double reaction_speed_factor = 1.0;  ///< fraction of preferred speed kept while blocked
  double acceleration = 1.0;           ///< m/s^2
  double goal_tolerance = 0.15;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Uniform doubles from a 64-bit engine, independent of the standard library's distributions.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int uniform_int(int lo, int hi);  ///< inclusive bounds
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

Scenario generate_scenario(std::uint64_t seed, const SimConfig& cfg);

/// Advances one agent by cfg.dt against a fixed snapshot of the world.
SimAgent step_agent(const SimAgent& agent, const Scenario& world, const SimConfig& cfg);

/// Steps every agent against the same pre-step snapshot and advances the clock.
void step_world(Scenario& world, const SimConfig& cfg);

/// World-frame bearing of ray i.
double ray_angle(const Pose2& pose, int i, int n_rays);

/// Distance along a unit ray to the first intersection with a circle, if any lies ahead.
std::optional<double> ray_circle_distance(Vec2 origin, Vec2 dir, const Circle& c);

LidarScan raycast(const Scenario& world, const SimConfig& cfg);

/// True when the open segment a-b passes strictly inside the circle.
bool segment_hits_circle(Vec2 a, Vec2 b, const Circle& c);

/// Line-of-sight test from the robot to `target` within max_ray. Footprints listed in
/// `skip_obstacle` / `skip_agent` (the target's own) are ignored.
bool is_visible(const Scenario& world, Vec2 target, double max_ray, std::optional<std::size_t> skip_obstacle,
                std::optional<AgentId> skip_agent);

std::vector<AgentObservation> visible_agents(const Scenario& world, const SimConfig& cfg);

struct AgentState {
  AgentId id = 0;
  Vec2 position;
  Vec2 velocity;
};

struct TickRecord {
  int tick = 0;
  double time = 0.0;
  LidarScan scan;
  std::vector<AgentObservation> observations;
  std::vector<AgentState> agents;  ///< ground truth
};

struct EpisodeLog {
  Scenario initial;  ///< world at tick 0, including the static obstacles used for ground truth
  SimConfig config;
  std::vector<TickRecord> ticks;
};

EpisodeLog run_episode(const Scenario& scenario, const SimConfig& cfg, int horizon_ticks);

/// Ground-truth world for one logged tick.
Scenario world_at(const EpisodeLog& log, const TickRecord& tick);

}  // namespace occpred
