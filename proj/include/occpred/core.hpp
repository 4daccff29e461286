#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace occpred {

inline constexpr double kPi = 3.14159265358979323846;

/// Tolerance used by every symmetry / positive-semidefinite check.
inline constexpr double kPsdTolerance = 1e-9;

using AgentId = std::int64_t;

/// Planar vector in meters (or m/s for velocities). Components are always finite.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {
    if (!std::isfinite(x_) || !std::isfinite(y_)) {
      throw std::invalid_argument("Vec2: non-finite component");
    }
  }

  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Row-major 2x2 covariance in m^2. Construction validates symmetry and PSD.
struct Cov2 {
  double xx = 0.0;
  double xy = 0.0;
  double yx = 0.0;
  double yy = 0.0;

  constexpr Cov2() = default;
  Cov2(double xx_, double xy_, double yx_, double yy_);

  static Cov2 diagonal(double a, double b) { return {a, 0.0, 0.0, b}; }

  double trace() const { return xx + yy; }
  double determinant() const { return xx * yy - xy * yx; }

  friend bool operator==(const Cov2&, const Cov2&) = default;
};

/// True when the entries form a symmetric PSD matrix within kPsdTolerance.
bool is_symmetric_psd(double xx, double xy, double yx, double yy);

struct AgentObservation {
  AgentId agent_id = 0;
  double t = 0.0;
  Vec2 position;
  Vec2 velocity;
};

enum class ObstacleKind { Front, SideLeft, SideRight, Fused };

std::string to_string(ObstacleKind kind);
ObstacleKind obstacle_kind_from_string(const std::string& name);

struct GaussianObstacle {
  Vec2 mean;
  Cov2 cov;
  double t_occ = 0.0;  ///< absolute time at which the region is expected to be occupied
  ObstacleKind kind = ObstacleKind::Front;
  std::optional<AgentId> source_agent;
  double created_at = 0.0;
};

/// Tunables for the predict -> clear -> fuse -> publish chain.
struct PipelineConfig {
  double epsilon = 1e-6;
  double obstacle_clearance = 0.15;
  double window_duration = 1.0;
  // Longest tolerated gap between an agent's consecutive observations before its window restarts.
  double max_sample_gap = 0.25;
  double avg_turn_trigger = 0.15;
  double max_turn_trigger = 0.40;
  // Steps where either endpoint moves slower than this contribute no turning.
  double min_motion_speed = 0.05;
  // Agents that came this close to the robot within the window are reacting to the robot itself,
  // so their turns say nothing about hidden obstacles. Zero disables the check.
  double self_reaction_radius = 0.8;
  // Re-test live tracks against every scan, not only fresh estimates.
  bool clear_tracks = true;
  double max_ray = 3.0;
  int n_sectors = 36;
  double assoc_radius = 1.0;
  double c1 = 1.1;
  double c2 = 0.3;
  double cost_floor = 0.1;
  double cost_ceiling = 1.0;
  double decay_rate = 0.09;
  double retention = 5.0;

  // Fusion noise, diagonal over [dt, c_xx, c_xy, c_yx, c_yy, x, y].
  std::array<double, 7> q_base{0.05, 0.01, 0.01, 0.01, 0.01, 0.04, 0.04};  // per second
  std::array<double, 7> r_base{0.1, 0.02, 0.02, 0.02, 0.02, 0.05, 0.05};
  std::array<double, 7> p_init{0.5, 0.1, 0.1, 0.1, 0.1, 0.25, 0.25};

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

/// Maps theta onto (-pi, pi].
double wrap_angle(double theta);

/// R(theta) C R(theta)^T. Throws std::invalid_argument if C is not symmetric PSD.
Cov2 rotate_cov(const Cov2& c, double theta);

}  // namespace occpred
