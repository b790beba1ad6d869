#pragma once

// Artificial potential field guidance.
//
// Direction conventions (all vectors in one common frame):
//   b    points from the follower to the target; v_r = db/dt, a_r = dv_r/dt.
//   b_o  points from the obstacle to the follower; v_o = db_o/dt, a_o = dv_o/dt.
// Attraction acts along b, static repulsion along b_o. The kinetic
// repulsion also acts along b_o and only while the follower is closing on
// the obstacle (b_o . v_o < 0). Every repulsive term is blended to zero over
// the outer 10% of the obstacle's influence radius.

#include "rpo/lie.hpp"

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpo {

class CollisionError : public std::runtime_error {
 public:
  explicit CollisionError(const std::string& what) : std::runtime_error(what) {}
};

struct Obstacle {
  Vec3 position = Vec3::Zero();  // inertial, m
  Vec3 velocity = Vec3::Zero();  // inertial, m/s
  double hard_radius = 0.5;
  double influence_radius = 5.0;

  void validate() const {
    if (!(hard_radius > 0.0) || !(influence_radius > hard_radius)) {
      throw std::invalid_argument("obstacle radii must satisfy influence > hard > 0");
    }
  }
};

struct ApfGains {
  double mu_a = 0.1;
  std::optional<double> mu_a_vel;  // kinetic attractive gain, defaults to mu_a
  double mu_r = 10.0;
  double v_min = 1e-3;         // m/s
  double accel_window = 0.5;   // s

  double kinetic_gain() const { return mu_a_vel.value_or(mu_a); }

  void validate() const {
    if (!(mu_a > 0.0) || !(mu_r > 0.0) || !(v_min > 0.0) || !(accel_window > 0.0) ||
        (mu_a_vel && !(*mu_a_vel > 0.0))) {
      throw std::invalid_argument("APF gains must all be positive");
    }
  }
};

/// Geometry of the follower relative to one obstacle.
struct ObstacleKinematics {
  Vec3 b_o = Vec3::Zero();
  Vec3 v_o = Vec3::Zero();
  Vec3 a_o = Vec3::Zero();
  double hard_radius = 0.5;
  double influence_radius = 5.0;
};

/// Geometry of the follower relative to the target.
struct TargetKinematics {
  Vec3 b = Vec3::Zero();
  Vec3 v_r = Vec3::Zero();
  Vec3 a_r = Vec3::Zero();
};

struct GuidanceDiagnostics {
  double H_a = 0.0;
  double H_r = 0.0;
  Vec3 p_a = Vec3::Zero();
  std::vector<double> p_r;        // one per obstacle, mu_r / max(|v_o|, v_min)
  std::vector<double> distances;  // one per obstacle
};

/// C1 blend: 1 inside 0.9 R, 0 outside R, smoothstep in between.
inline double influence_gate(double d, double influence_radius) {
  const double inner = 0.9 * influence_radius;
  if (d <= inner) return 1.0;
  if (d >= influence_radius) return 0.0;
  const double x = (influence_radius - d) / (influence_radius - inner);
  return x * x * (3.0 - 2.0 * x);
}

namespace detail {

inline double checked_distance(const ObstacleKinematics& ob) {
  const double d = ob.b_o.norm();
  if (!(d > ob.hard_radius)) {
    throw CollisionError("follower inside obstacle hard radius (d = " + std::to_string(d) + " m)");
  }
  return d;
}

// mu_r / d^3 along b_o, gated. Shared by both guidance laws so their static
// parts are computed with identical arithmetic.
inline Vec3 static_repulsion(const ObstacleKinematics& ob, double mu_r, double d) {
  const double gate = influence_gate(d, ob.influence_radius);
  if (gate == 0.0) return Vec3::Zero();
  return (gate * mu_r / (d * d * d)) * (ob.b_o / d);
}

}  // namespace detail

/// Position-only field: mu_a b + sum of gated mu_r / d^3 repulsions.
inline Vec3 conventional_apf_force(const Vec3& b, std::span<const ObstacleKinematics> obstacles,
                                   const ApfGains& g) {
  Vec3 f = g.mu_a * b;
  for (const auto& ob : obstacles) {
    const double d = detail::checked_distance(ob);
    f += detail::static_repulsion(ob, g.mu_r, d);
  }
  return f;
}

struct AttractiveHamiltonian {
  double H_a = 0.0;
  Vec3 p_a = Vec3::Zero();
};

/// H_a = p_a^2 / (2 mu) + mu b^2 / 2 with p_a = mu v_r.
inline AttractiveHamiltonian attractive_hamiltonian(const Vec3& b, const Vec3& v_r, const ApfGains& g) {
  const double mu_v = g.kinetic_gain();
  AttractiveHamiltonian out;
  out.p_a = mu_v * v_r;
  out.H_a = 0.5 * mu_v * v_r.squaredNorm() + 0.5 * g.mu_a * b.squaredNorm();
  return out;
}

/// F_a = mu_a b + mu_a a_r.
inline Vec3 attractive_force(const Vec3& b, const Vec3& a_r, const ApfGains& g) {
  return g.mu_a * b + g.kinetic_gain() * a_r;
}

/// Static repulsion plus the kinetic term mu_r |a_o| / max(|v_o|, v_min)^2,
/// both along b_o; the kinetic term is active only while closing.
inline Vec3 repulsive_force(const ObstacleKinematics& ob, const ApfGains& g) {
  const double d = detail::checked_distance(ob);
  Vec3 f = detail::static_repulsion(ob, g.mu_r, d);
  if (ob.b_o.dot(ob.v_o) < 0.0) {
    const double gate = influence_gate(d, ob.influence_radius);
    const double v = std::max(ob.v_o.norm(), g.v_min);
    f += (gate * g.mu_r * ob.a_o.norm() / (v * v)) * (ob.b_o / d);
  }
  return f;
}

struct ApfOutput {
  Wrench wrench = Wrench::Zero();  // torque part is always zero
  GuidanceDiagnostics diagnostics;
};

inline GuidanceDiagnostics guidance_diagnostics(const TargetKinematics& tk,
                                                std::span<const ObstacleKinematics> obstacles,
                                                const ApfGains& g) {
  GuidanceDiagnostics diag;
  const auto ha = attractive_hamiltonian(tk.b, tk.v_r, g);
  diag.H_a = ha.H_a;
  diag.p_a = ha.p_a;
  for (const auto& ob : obstacles) {
    const double d = ob.b_o.norm();
    const double v = std::max(ob.v_o.norm(), g.v_min);
    diag.distances.push_back(d);
    diag.p_r.push_back(g.mu_r / v);
    diag.H_r += 0.5 * g.mu_r / (v * v) + 0.5 * g.mu_r / (d * d);
  }
  return diag;
}

/// Physics-informed field: attractive_force + sum of repulsive_force.
inline ApfOutput pi_apf_total(const TargetKinematics& tk, std::span<const ObstacleKinematics> obstacles,
                              const ApfGains& g) {
  Vec3 f = attractive_force(tk.b, tk.a_r, g);
  for (const auto& ob : obstacles) f += repulsive_force(ob, g);
  return {stack(Vec3::Zero(), f), guidance_diagnostics(tk, obstacles, g)};
}

inline ApfOutput conventional_apf_total(const TargetKinematics& tk,
                                        std::span<const ObstacleKinematics> obstacles,
                                        const ApfGains& g) {
  return {stack(Vec3::Zero(), conventional_apf_force(tk.b, obstacles, g)),
          guidance_diagnostics(tk, obstacles, g)};
}

struct DetectorSettings {
  double window = 30.0;      // s
  double speed_eps = 1e-3;   // m/s
  double goal_eps = 0.5;     // m
  double force_eps = 1e-2;   // N
};

struct DetectorReport {
  bool trapped = false;
  double mean_speed = 0.0;
  double min_goal_distance = 0.0;
  double mean_force = 0.0;
  std::size_t samples = 0;
};

/// Flags a stall: over a full window the mean relative speed is below
/// speed_eps, the follower never came within goal_eps of the target, and the
/// mean net force on the relative motion is below force_eps.
class LocalMinimumDetector {
 public:
  LocalMinimumDetector(const DetectorSettings& s, double dt)
      : settings_(s), capacity_(static_cast<std::size_t>(std::ceil(s.window / dt - 1e-9))) {
    if (!(dt > 0.0) || !(s.window > 0.0)) {
      throw std::invalid_argument("detector window and dt must be positive");
    }
    if (capacity_ == 0) capacity_ = 1;
  }

  void push(double speed, double goal_distance, double net_force) {
    window_.push_back({speed, goal_distance, net_force});
    if (window_.size() > capacity_) window_.pop_front();
  }

  DetectorReport report() const {
    DetectorReport r;
    r.samples = window_.size();
    if (window_.empty()) return r;
    r.min_goal_distance = std::numeric_limits<double>::infinity();
    for (const auto& s : window_) {
      r.mean_speed += s.speed;
      r.mean_force += s.force;
      r.min_goal_distance = std::min(r.min_goal_distance, s.goal);
    }
    r.mean_speed /= static_cast<double>(window_.size());
    r.mean_force /= static_cast<double>(window_.size());
    r.trapped = window_.size() >= capacity_ && r.mean_speed < settings_.speed_eps &&
                r.min_goal_distance > settings_.goal_eps && r.mean_force < settings_.force_eps;
    return r;
  }

  bool triggered() const { return report().trapped; }
  std::size_t capacity() const { return capacity_; }

 private:
  struct Sample {
    double speed;
    double goal;
    double force;
  };
  DetectorSettings settings_;
  std::size_t capacity_;
  std::deque<Sample> window_;
};

}  // namespace rpo
