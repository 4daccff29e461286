#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "occpred/crowd_sim.hpp"

namespace occpred {
namespace {

Scenario empty_world() {
  Scenario w;
  w.robot = {{0.0, 0.0}, 0.0};
  return w;
}

SimAgent agent(AgentId id, Vec2 p, Vec2 v, Vec2 goal) {
  SimAgent a;
  a.id = id;
  a.position = p;
  a.velocity = v;
  a.goal = goal;
  a.preferred_speed = v.norm() > 0.0 ? v.norm() : 1.0;
  a.heading = std::atan2(v.y, v.x);
  return a;
}

// First hit along a ray found by marching in 1 mm steps.
double marched_range(const Scenario& w, double bearing, double max_ray) {
  const Vec2 dir{std::cos(bearing), std::sin(bearing)};
  std::vector<Circle> bodies = w.static_obstacles;
  for (const auto& a : w.agents) bodies.push_back({a.position, a.radius});
  for (int k = 0; k <= static_cast<int>(max_ray * 1000.0); ++k) {
    const Vec2 p = w.robot.position + (k * 1e-3) * dir;
    for (const auto& c : bodies) {
      if (distance(p, c.center) <= c.radius) return k * 1e-3;
    }
  }
  return max_ray;
}

// Dense sampling of the open segment against a circle interior.
bool sampled_hit(Vec2 a, Vec2 b, const Circle& c) {
  for (int k = 1; k < 10000; ++k) {
    const Vec2 p = a + (k / 10000.0) * (b - a);
    if (distance(p, c.center) < c.radius) return true;
  }
  return false;
}

TEST(GenerateScenario, DeterministicPerSeed) {
  SimConfig cfg;
  for (std::uint64_t seed : {0ull, 1ull, 77ull}) {
    const Scenario a = generate_scenario(seed, cfg);
    const Scenario b = generate_scenario(seed, cfg);
    ASSERT_EQ(a.agents.size(), b.agents.size());
    ASSERT_EQ(a.static_obstacles.size(), b.static_obstacles.size());
    for (std::size_t i = 0; i < a.agents.size(); ++i) {
      EXPECT_EQ(a.agents[i].position, b.agents[i].position);
      EXPECT_EQ(a.agents[i].goal, b.agents[i].goal);
      EXPECT_EQ(a.agents[i].preferred_speed, b.agents[i].preferred_speed);
    }
    for (std::size_t i = 0; i < a.static_obstacles.size(); ++i) {
      EXPECT_EQ(a.static_obstacles[i].center, b.static_obstacles[i].center);
    }
  }
}

TEST(GenerateScenario, EmptyCountsGiveEmptyWorld) {
  SimConfig cfg;
  cfg.min_agents = cfg.max_agents = 0;
  cfg.min_obstacles = cfg.max_obstacles = 0;
  const Scenario s = generate_scenario(3, cfg);
  EXPECT_TRUE(s.agents.empty());
  EXPECT_TRUE(s.static_obstacles.empty());
  EXPECT_EQ(s.robot.position, cfg.robot.position);
}

TEST(GenerateScenario, TooDenseThrows) {
  SimConfig cfg;
  cfg.bounds = {-1.0, -1.0, 1.0, 1.0};
  cfg.min_obstacles = cfg.max_obstacles = 40;
  cfg.max_placement_attempts = 200;
  EXPECT_THROW(generate_scenario(1, cfg), ScenarioTooDense);
}

TEST(GenerateScenario, NoOverlapAndInsideBounds) {
  SimConfig cfg;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Scenario s = generate_scenario(seed, cfg);
    std::vector<Circle> bodies = s.static_obstacles;
    for (const auto& a : s.agents) bodies.push_back({a.position, a.radius});
    bodies.push_back({s.robot.position, s.robot_radius});
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      EXPECT_TRUE(s.bounds.contains(bodies[i].center, bodies[i].radius));
      for (std::size_t j = i + 1; j < bodies.size(); ++j) {
        EXPECT_GT(distance(bodies[i].center, bodies[j].center), bodies[i].radius + bodies[j].radius);
      }
    }
    for (const auto& a : s.agents) {
      EXPECT_GE(distance(a.position, a.goal), cfg.min_goal_distance);
      EXPECT_GE(a.preferred_speed, cfg.min_speed);
      EXPECT_LE(a.preferred_speed, cfg.max_speed);
    }
  }
}

TEST(StepAgent, ClearPathHeadingErrorShrinks) {
  SimConfig cfg;
  Scenario w = empty_world();
  w.robot.position = {-3.5, -3.5};
  SimAgent a = agent(1, {-2.0, 2.0}, {0.0, -0.8}, {2.5, 2.0});
  double prev = 10.0;
  for (int k = 0; k < 15; ++k) {
    a = step_agent(a, w, cfg);
    const Vec2 to_goal = a.goal - a.position;
    const double err = std::abs(wrap_angle(std::atan2(to_goal.y, to_goal.x) - a.heading));
    EXPECT_LE(err, prev + 1e-12);
    prev = err;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(StepAgent, ObstacleDeadAheadForcesTurn) {
  SimConfig cfg;
  Scenario w = empty_world();
  w.robot.position = {-3.5, -3.5};
  const double inflated = cfg.obstacle_radius + cfg.agent_radius + cfg.clearance_margin;
  w.static_obstacles.push_back({{inflated + 0.5 * cfg.lookahead, 0.0}, cfg.obstacle_radius});
  const SimAgent a = agent(1, {0.0, 0.0}, {1.0, 0.0}, {3.5, 0.0});
  const SimAgent next = step_agent(a, w, cfg);
  EXPECT_GT(std::abs(wrap_angle(next.heading - a.heading)), 1e-3);
}

TEST(StepAgent, AtGoalStops) {
  SimConfig cfg;
  Scenario w = empty_world();
  const SimAgent a = agent(1, {2.0, 2.0}, {0.5, 0.0}, {2.0, 2.0});
  const SimAgent next = step_agent(a, w, cfg);
  EXPECT_DOUBLE_EQ(next.velocity.norm(), 0.0);
  EXPECT_EQ(next.position, a.position);
}

TEST(Raycast, EmptyWorldReadsMaxRay) {
  SimConfig cfg;
  const LidarScan s = raycast(empty_world(), cfg);
  ASSERT_EQ(s.ranges.size(), static_cast<std::size_t>(cfg.n_rays));
  for (double r : s.ranges) EXPECT_DOUBLE_EQ(r, cfg.max_ray);
}

TEST(Raycast, CircleDeadAhead) {
  SimConfig cfg;
  Scenario w = empty_world();
  w.static_obstacles.push_back({{1.0, 0.0}, 0.2});
  const LidarScan s = raycast(w, cfg);
  EXPECT_NEAR(s.ranges[0], 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(s.angles[0], 0.0);
}

TEST(Raycast, NearerOfStackedCircles) {
  SimConfig cfg;
  Scenario w = empty_world();
  w.static_obstacles.push_back({{2.0, 0.0}, 0.3});
  w.static_obstacles.push_back({{1.0, 0.0}, 0.2});
  const LidarScan s = raycast(w, cfg);
  EXPECT_NEAR(s.ranges[0], marched_range(w, 0.0, cfg.max_ray), 1e-3);
  EXPECT_NEAR(s.ranges[0], 0.8, 1e-12);
}

TEST(Raycast, MatchesAnalyticQuadraticAndMarching) {
  SimConfig cfg;
  cfg.n_rays = 90;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.8, 2.8);
  std::uniform_real_distribution<double> rad(0.1, 0.4);
  for (int trial = 0; trial < 20; ++trial) {
    Scenario w = empty_world();
    w.robot.heading = u(rng);
    for (int i = 0; i < 5; ++i) {
      const Vec2 c{u(rng), u(rng)};
      const double r = rad(rng);
      if (c.norm() > r + 0.05) w.static_obstacles.push_back({c, r});
    }
    const LidarScan s = raycast(w, cfg);
    for (int i = 0; i < cfg.n_rays; ++i) {
      const double a = s.angles[static_cast<std::size_t>(i)];
      const Vec2 d{std::cos(a), std::sin(a)};
      // Smallest non-negative root of |t d - c|^2 = r^2.
      double best = cfg.max_ray;
      for (const auto& c : w.static_obstacles) {
        const double b = dot(d, c.center);
        const double disc = b * b - (c.center.squared_norm() - c.radius * c.radius);
        if (disc < 0.0) continue;
        const double t = b - std::sqrt(disc);
        if (t >= 0.0) best = std::min(best, t);
      }
      ASSERT_NEAR(s.ranges[static_cast<std::size_t>(i)], best, 1e-6);
      if (i % 15 == 0) {
        ASSERT_NEAR(s.ranges[static_cast<std::size_t>(i)], marched_range(w, a, cfg.max_ray), 1.5e-3);
      }
    }
  }
}

TEST(Visibility, Examples) {
  SimConfig cfg;
  Scenario w = empty_world();
  w.agents.push_back(agent(1, {1.0, 0.0}, {0.0, 1.0}, {1.0, 3.0}));
  w.agents.push_back(agent(2, {0.0, 3.5}, {1.0, 0.0}, {3.0, 3.5}));
  w.agents.push_back(agent(3, {-2.0, 0.0}, {0.0, 1.0}, {-2.0, 3.0}));
  w.static_obstacles.push_back({{-1.0, 0.0}, 0.2});
  const auto vis = visible_agents(w, cfg);
  ASSERT_EQ(vis.size(), 1u);
  EXPECT_EQ(vis[0].agent_id, 1);
  EXPECT_EQ(vis[0].position, w.agents[0].position);
  EXPECT_EQ(vis[0].velocity, w.agents[0].velocity);
  EXPECT_TRUE(sampled_hit(w.robot.position, w.agents[2].position, w.static_obstacles[0]));
}

TEST(Visibility, SegmentTestMatchesDenseSampling) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int hits = 0;
  for (int i = 0; i < 300; ++i) {
    const Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const Circle c{{u(rng) * 0.5, u(rng) * 0.5}, 0.2 + 0.1 * std::abs(u(rng))};
    if (distance(a, c.center) <= c.radius || distance(b, c.center) <= c.radius) continue;
    const bool exact = segment_hits_circle(a, b, c);
    hits += exact;
    ASSERT_EQ(exact, sampled_hit(a, b, c));
  }
  EXPECT_GT(hits, 10);
}

TEST(Visibility, AddingOccludersNeverRevealsAgents) {
  SimConfig cfg;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3.5, 3.5);
  for (int trial = 0; trial < 200; ++trial) {
    Scenario w = empty_world();
    for (AgentId id = 0; id < 8; ++id) w.agents.push_back(agent(id, {u(rng), u(rng)}, {1.0, 0.0}, {0.0, 0.0}));
    auto ids = [&] {
      std::vector<AgentId> out;
      for (const auto& o : visible_agents(w, cfg)) out.push_back(o.agent_id);
      return out;
    };
    auto before = ids();
    for (int k = 0; k < 4; ++k) {
      w.static_obstacles.push_back({{u(rng), u(rng)}, 0.2});
      const auto after = ids();
      for (AgentId id : after) ASSERT_NE(std::find(before.begin(), before.end(), id), before.end());
      before = after;
    }
  }
}

TEST(RunEpisode, ZeroHorizonIsEmpty) {
  SimConfig cfg;
  EXPECT_TRUE(run_episode(generate_scenario(2, cfg), cfg, 0).ticks.empty());
}

TEST(RunEpisode, DeterministicAndCollisionFree) {
  SimConfig cfg;
  cfg.horizon_ticks = 150;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Scenario s = generate_scenario(seed, cfg);
    const EpisodeLog a = run_episode(s, cfg, cfg.horizon_ticks);
    const EpisodeLog b = run_episode(s, cfg, cfg.horizon_ticks);
    ASSERT_EQ(a.ticks.size(), static_cast<std::size_t>(cfg.horizon_ticks));
    for (std::size_t k = 0; k < a.ticks.size(); ++k) {
      ASSERT_EQ(a.ticks[k].scan.ranges, b.ticks[k].scan.ranges);
      ASSERT_EQ(a.ticks[k].observations.size(), b.ticks[k].observations.size());
      for (std::size_t i = 0; i < a.ticks[k].agents.size(); ++i) {
        ASSERT_EQ(a.ticks[k].agents[i].position, b.ticks[k].agents[i].position);
        for (const auto& o : s.static_obstacles) {
          ASSERT_GT(distance(a.ticks[k].agents[i].position, o.center), o.radius + cfg.agent_radius - 1e-9);
        }
      }
    }
  }
}

TEST(WorldAt, RebuildsSnapshot) {
  SimConfig cfg;
  const Scenario s = generate_scenario(4, cfg);
  const EpisodeLog log = run_episode(s, cfg, 20);
  const Scenario w = world_at(log, log.ticks[10]);
  EXPECT_DOUBLE_EQ(w.time, log.ticks[10].time);
  ASSERT_EQ(w.agents.size(), s.agents.size());
  EXPECT_EQ(w.agents[0].position, log.ticks[10].agents[0].position);
  EXPECT_EQ(w.static_obstacles.size(), s.static_obstacles.size());
}

}  // namespace
}  // namespace occpred
