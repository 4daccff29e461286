#include "occpred/crowd_sim.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace occpred {

void SimConfig::validate() const {
  auto require = [](bool ok, const char* key) {
    if (!ok) throw std::invalid_argument(std::string("invalid sim config value for '") + key + "'");
  };
  require(dt > 0.0, "dt");
  require(max_ray > 0.0, "max_ray");
  require(n_rays > 0, "n_rays");
  require(horizon_ticks >= 0, "horizon_ticks");
  require(bounds.max_x > bounds.min_x && bounds.max_y > bounds.min_y, "bounds");
  require(robot_radius >= 0.0, "robot_radius");
  require(obstacle_radius > 0.0, "obstacle_radius");
  require(agent_radius > 0.0, "agent_radius");
  require(min_agents >= 0 && max_agents >= min_agents, "max_agents");
  require(min_obstacles >= 0 && max_obstacles >= min_obstacles, "max_obstacles");
  require(min_speed > 0.0 && max_speed >= min_speed, "max_speed");
  require(min_goal_distance >= 0.0, "min_goal_distance");
  require(placement_gap >= 0.0, "placement_gap");
  require(max_placement_attempts > 0, "max_placement_attempts");
  require(lookahead > 0.0, "lookahead");
  require(clearance_margin >= 0.0, "clearance_margin");
  require(heading_resolution > 0.0 && heading_resolution < kPi, "heading_resolution");
  require(avoid_turn_rate > 0.0, "avoid_turn_rate");
  require(goal_turn_rate > 0.0, "goal_turn_rate");
  require(reaction_speed_factor > 0.0 && reaction_speed_factor <= 1.0, "reaction_speed_factor");
  require(acceleration > 0.0, "acceleration");
  require(goal_tolerance > 0.0, "goal_tolerance");
}

int SimRng::uniform_int(int lo, int hi) {
  const int span = hi - lo + 1;
  const int k = static_cast<int>(unit() * span);
  return lo + std::min(k, span - 1);
}

namespace {

struct Footprint {
  Vec2 center;
  double radius;
};

bool overlaps(Vec2 p, double r, const std::vector<Footprint>& placed, double gap) {
  return std::any_of(placed.begin(), placed.end(),
                     [&](const Footprint& f) { return distance(p, f.center) < r + f.radius + gap; });
}

Vec2 sample_point(SimRng& rng, const Bounds& b, double margin) {
  const double x = rng.uniform(b.min_x + margin, b.max_x - margin);
  const double y = rng.uniform(b.min_y + margin, b.max_y - margin);
  return {x, y};
}

Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

Scenario generate_scenario(std::uint64_t seed, const SimConfig& cfg) {
  cfg.validate();
  SimRng rng(seed);
  Scenario s;
  s.seed = seed;
  s.bounds = cfg.bounds;
  s.robot = cfg.robot;
  s.robot_radius = cfg.robot_radius;

  const int n_obstacles = rng.uniform_int(cfg.min_obstacles, cfg.max_obstacles);
  const int n_agents = rng.uniform_int(cfg.min_agents, cfg.max_agents);

  std::vector<Footprint> placed{{cfg.robot.position, cfg.robot_radius}};
  auto place = [&](double radius, const std::vector<Footprint>& avoid, const char* what) {
    for (int attempt = 0; attempt < cfg.max_placement_attempts; ++attempt) {
      const Vec2 p = sample_point(rng, cfg.bounds, radius);
      if (!overlaps(p, radius, avoid, cfg.placement_gap)) return p;
    }
    throw ScenarioTooDense(std::string("seed ") + std::to_string(seed) + ": could not place " + what);
  };

  for (int i = 0; i < n_obstacles; ++i) {
    const Vec2 c = place(cfg.obstacle_radius, placed, "static obstacle");
    s.static_obstacles.push_back({c, cfg.obstacle_radius});
    placed.push_back({c, cfg.obstacle_radius});
  }

  std::vector<Footprint> goals;
  for (int i = 0; i < n_agents; ++i) {
    const Vec2 start = place(cfg.agent_radius, placed, "agent start");
    placed.push_back({start, cfg.agent_radius});

    // Goals keep clear of static footprints, the robot and each other, and lie far enough away
    // that the agent has to travel.
    std::vector<Footprint> goal_avoid{{cfg.robot.position, cfg.robot_radius}};
    for (const auto& o : s.static_obstacles) goal_avoid.push_back({o.center, o.radius});
    goal_avoid.insert(goal_avoid.end(), goals.begin(), goals.end());
    std::optional<Vec2> goal;
    for (int attempt = 0; attempt < cfg.max_placement_attempts && !goal; ++attempt) {
      const Vec2 g = sample_point(rng, cfg.bounds, cfg.agent_radius);
      if (distance(g, start) < cfg.min_goal_distance) continue;
      if (overlaps(g, cfg.agent_radius, goal_avoid, cfg.placement_gap)) continue;
      goal = g;
    }
    if (!goal) throw ScenarioTooDense("seed " + std::to_string(seed) + ": could not place agent goal");
    goals.push_back({*goal, cfg.agent_radius});

    SimAgent a;
    a.id = i;
    a.position = start;
    a.goal = *goal;
    a.preferred_speed = rng.uniform(cfg.min_speed, cfg.max_speed);
    a.radius = cfg.agent_radius;
    a.heading = std::atan2(a.goal.y - start.y, a.goal.x - start.x);
    a.velocity = a.preferred_speed * unit_vector(a.heading);
    s.agents.push_back(a);
  }
  return s;
}

namespace {

// Whether moving along `heading` from `p` enters the inflated footprint within `lookahead`.
bool heading_blocked(Vec2 p, double heading, const std::vector<Footprint>& inflated, double lookahead) {
  const Vec2 u = unit_vector(heading);
  for (const auto& f : inflated) {
    const Vec2 rel = f.center - p;
    const double along = dot(rel, u);
    if (along <= 0.0) continue;
    const double lateral = std::abs(cross(u, rel));
    if (lateral >= f.radius) continue;
    const double entry = along - std::sqrt(f.radius * f.radius - lateral * lateral);
    if (entry < lookahead) return true;
  }
  return false;
}

// Free heading closest to `desired`, scanning outward in both directions.
std::optional<double> closest_free_heading(Vec2 p, double desired, const std::vector<Footprint>& inflated,
                                           const SimConfig& cfg) {
  if (!heading_blocked(p, desired, inflated, cfg.lookahead)) return desired;
  const int steps = static_cast<int>(std::ceil(kPi / cfg.heading_resolution));
  for (int k = 1; k <= steps; ++k) {
    const double delta = k * cfg.heading_resolution;
    for (const double sign : {1.0, -1.0}) {
      const double h = wrap_angle(desired + sign * delta);
      if (!heading_blocked(p, h, inflated, cfg.lookahead)) return h;
    }
  }
  return std::nullopt;
}

}  // namespace

SimAgent step_agent(const SimAgent& agent, const Scenario& world, const SimConfig& cfg) {
  SimAgent a = agent;
  const Vec2 to_goal = agent.goal - agent.position;
  const double goal_dist = to_goal.norm();
  if (goal_dist <= cfg.goal_tolerance) {
    a.velocity = {};
    return a;
  }

  std::vector<Footprint> bodies;
  bodies.reserve(world.static_obstacles.size() + world.agents.size() + 1);
  for (const auto& o : world.static_obstacles) bodies.push_back({o.center, o.radius});
  for (const auto& other : world.agents) {
    if (other.id != agent.id) bodies.push_back({other.position, other.radius});
  }
  bodies.push_back({world.robot.position, world.robot_radius});

  // Only entities nearer than the goal can block the way to it.
  std::vector<Footprint> inflated;
  inflated.reserve(bodies.size());
  for (const auto& b : bodies) {
    if (distance(b.center, agent.position) - b.radius > goal_dist) continue;
    inflated.push_back({b.center, b.radius + agent.radius + cfg.clearance_margin});
  }

  const double h = agent.heading;
  const double desired = std::atan2(to_goal.y, to_goal.x);
  const bool current_blocked = heading_blocked(agent.position, h, inflated, cfg.lookahead);
  const auto target = closest_free_heading(agent.position, desired, inflated, cfg);

  double new_heading = h;
  if (target) {
    const double rate = current_blocked ? cfg.avoid_turn_rate : cfg.goal_turn_rate;
    const double max_step = rate * cfg.dt;
    new_heading = wrap_angle(h + std::clamp(wrap_angle(*target - h), -max_step, max_step));
  }
  a.heading = new_heading;
  if (!target) {
    a.velocity = {};
    return a;
  }

  // Reactions cut speed at once; recovery is limited by the acceleration.
  const double cruise = current_blocked ? cfg.reaction_speed_factor * agent.preferred_speed : agent.preferred_speed;
  const double speed = std::min({cruise, agent.velocity.norm() + cfg.acceleration * cfg.dt, goal_dist / cfg.dt});
  const Vec2 v = speed * unit_vector(new_heading);
  const Vec2 next = agent.position + cfg.dt * v;
  const bool collides = std::any_of(bodies.begin(), bodies.end(), [&](const Footprint& f) {
    return distance(next, f.center) < f.radius + agent.radius;
  });
  if (collides) {
    a.velocity = {};
    return a;
  }
  a.position = next;
  a.velocity = v;
  return a;
}

void step_world(Scenario& world, const SimConfig& cfg) {
  std::vector<SimAgent> next;
  next.reserve(world.agents.size());
  for (const auto& a : world.agents) next.push_back(step_agent(a, world, cfg));
  world.agents = std::move(next);
  world.time += cfg.dt;
}

double ray_angle(const Pose2& pose, int i, int n_rays) {
  return pose.heading + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n_rays);
}

std::optional<double> ray_circle_distance(Vec2 origin, Vec2 dir, const Circle& c) {
  const Vec2 f = origin - c.center;
  const double b = dot(f, dir);
  const double cc = f.squared_norm() - c.radius * c.radius;
  const double disc = b * b - cc;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double near = -b - root;
  if (near > 0.0) return near;
  const double far = -b + root;
  if (far > 0.0) return far;  // origin inside the circle
  return std::nullopt;
}

LidarScan raycast(const Scenario& world, const SimConfig& cfg) {
  LidarScan scan;
  scan.robot_pose = world.robot;
  scan.stamp = world.time;
  scan.angles.resize(static_cast<std::size_t>(cfg.n_rays));
  scan.ranges.assign(static_cast<std::size_t>(cfg.n_rays), cfg.max_ray);

  std::vector<Circle> circles = world.static_obstacles;
  for (const auto& a : world.agents) circles.push_back({a.position, a.radius});

  for (int i = 0; i < cfg.n_rays; ++i) {
    const double angle = ray_angle(world.robot, i, cfg.n_rays);
    const auto idx = static_cast<std::size_t>(i);
    scan.angles[idx] = angle;
    const Vec2 dir = unit_vector(angle);
    for (const auto& c : circles) {
      if (auto d = ray_circle_distance(world.robot.position, dir, c); d && *d < scan.ranges[idx]) {
        scan.ranges[idx] = *d;
      }
    }
  }
  return scan;
}

bool segment_hits_circle(Vec2 a, Vec2 b, const Circle& c) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  double t = len2 > 0.0 ? dot(c.center - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 closest = a + t * ab;
  return distance(closest, c.center) < c.radius;
}

bool is_visible(const Scenario& world, Vec2 target, double max_ray, std::optional<std::size_t> skip_obstacle,
                std::optional<AgentId> skip_agent) {
  const Vec2 origin = world.robot.position;
  if (distance(origin, target) > max_ray) return false;
  for (std::size_t i = 0; i < world.static_obstacles.size(); ++i) {
    if (skip_obstacle && *skip_obstacle == i) continue;
    if (segment_hits_circle(origin, target, world.static_obstacles[i])) return false;
  }
  for (const auto& a : world.agents) {
    if (skip_agent && *skip_agent == a.id) continue;
    if (segment_hits_circle(origin, target, {a.position, a.radius})) return false;
  }
  return true;
}

std::vector<AgentObservation> visible_agents(const Scenario& world, const SimConfig& cfg) {
  std::vector<AgentObservation> out;
  for (const auto& a : world.agents) {
    if (!is_visible(world, a.position, cfg.max_ray, std::nullopt, a.id)) continue;
    out.push_back({a.id, world.time, a.position, a.velocity});
  }
  return out;
}

EpisodeLog run_episode(const Scenario& scenario, const SimConfig& cfg, int horizon_ticks) {
  cfg.validate();
  EpisodeLog log;
  log.initial = scenario;
  log.config = cfg;
  Scenario world = scenario;
  log.ticks.reserve(static_cast<std::size_t>(std::max(horizon_ticks, 0)));
  for (int k = 0; k < horizon_ticks; ++k) {
    world.time = static_cast<double>(k) * cfg.dt;
    TickRecord rec;
    rec.tick = k;
    rec.time = world.time;
    rec.scan = raycast(world, cfg);
    rec.observations = visible_agents(world, cfg);
    for (const auto& a : world.agents) rec.agents.push_back({a.id, a.position, a.velocity});
    log.ticks.push_back(std::move(rec));
    step_world(world, cfg);
  }
  return log;
}

Scenario world_at(const EpisodeLog& log, const TickRecord& tick) {
  Scenario w;
  w.static_obstacles = log.initial.static_obstacles;
  w.robot = log.initial.robot;
  w.robot_radius = log.initial.robot_radius;
  w.bounds = log.initial.bounds;
  w.seed = log.initial.seed;
  w.time = tick.time;
  for (const auto& s : tick.agents) {
    SimAgent a;
    a.id = s.id;
    a.position = s.position;
    a.velocity = s.velocity;
    a.goal = s.position;
    a.radius = log.config.agent_radius;
    w.agents.push_back(a);
  }
  return w;
}

}  // namespace occpred
