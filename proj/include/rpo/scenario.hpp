#pragma once

// In-memory description of one rendezvous simulation.

#include "rpo/apf.hpp"
#include "rpo/dynamics.hpp"
#include "rpo/ftsmc.hpp"
#include "rpo/orbit.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpo {

enum class GuidanceMode { none, conventional, physics_informed };
enum class ObstacleMotion { two_body, ballistic };

/// Obstacle placed relative to the target at t = 0, in the target body
/// frame. `velocity` is the rate seen from that (rotating) frame.
struct ObstacleSpec {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double hard_radius = 0.5;
  double influence_radius = 5.0;
};

struct DisturbanceSpec {
  Vec3 torque = Vec3::Zero();   // constant part, N m
  Vec3 force = Vec3::Zero();    // constant part, N
  double torque_amplitude = 0.0;
  double force_amplitude = 0.0;
  double cutoff_hz = 0.05;
  int harmonics = 8;

  Disturbance build(std::uint64_t seed) const {
    return Disturbance(stack(torque, force), torque_amplitude, force_amplitude, cutoff_hz, seed, harmonics);
  }
};

struct EventSettings {
  double capture_eps = 0.05;   // m
  double vel_eps = 0.01;       // norm of the relative twist
  bool terminate_on_capture = true;
  DetectorSettings stall;
};

struct Scenario {
  std::string name = "scenario";
  OrbitalElements orbit{2.66e7, 0.72, 1.1065, 0.0, -1.5708, 0.0};
  double mu_earth = kMuEarth;
  BodyParams target{110.0, Vec3(20.0, 22.0, 25.0).asDiagonal()};
  BodyParams follower{110.0, Vec3(20.0, 22.0, 25.0).asDiagonal()};
  ExpCoords rho0 = ExpCoords::Zero();
  Twist xi0 = Twist::Zero();
  std::vector<ObstacleSpec> obstacles;
  ObstacleMotion obstacle_motion = ObstacleMotion::two_body;
  ApfGains apf;
  SmcGains smc;
  GuidanceMode mode = GuidanceMode::physics_informed;
  DisturbanceSpec follower_disturbance;
  DisturbanceSpec target_disturbance;
  bool feed_disturbance = true;   // controller sees the true follower disturbance
  EventSettings events;
  double dt = 0.05;
  double t_end = 300.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(orbit.e >= 0.0 && orbit.e < 1.0)) throw std::invalid_argument("eccentricity must be in [0, 1)");
    if (!(orbit.a * (1.0 - orbit.e) > kEarthRadius)) {
      throw std::invalid_argument("perigee radius must exceed the Earth radius");
    }
    if (!(mu_earth > 0.0)) throw std::invalid_argument("mu_earth must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(t_end > dt)) throw std::invalid_argument("t_end must exceed dt");
    if (!(angular(rho0).norm() < std::numbers::pi)) {
      throw std::invalid_argument("initial relative rotation must be inside the principal chart");
    }
    if (!rho0.allFinite() || !xi0.allFinite()) throw std::invalid_argument("initial conditions must be finite");
    target.validate();
    follower.validate();
    apf.validate();
    smc.validate();
    for (const auto& o : obstacles) {
      Obstacle{o.position, o.velocity, o.hard_radius, o.influence_radius}.validate();
    }
    if (!(events.capture_eps > 0.0) || !(events.vel_eps > 0.0)) {
      throw std::invalid_argument("capture thresholds must be positive");
    }
  }
};

inline const char* to_string(GuidanceMode m) {
  switch (m) {
    case GuidanceMode::none: return "none";
    case GuidanceMode::conventional: return "conventional";
    case GuidanceMode::physics_informed: return "physics_informed";
  }
  return "?";
}

inline GuidanceMode parse_guidance_mode(const std::string& s) {
  if (s == "none") return GuidanceMode::none;
  if (s == "conventional") return GuidanceMode::conventional;
  if (s == "physics_informed") return GuidanceMode::physics_informed;
  throw std::invalid_argument("unknown guidance mode '" + s + "' (none, conventional, physics_informed)");
}

inline const char* to_string(ObstacleMotion m) {
  return m == ObstacleMotion::two_body ? "two_body" : "ballistic";
}

inline ObstacleMotion parse_obstacle_motion(const std::string& s) {
  if (s == "two_body") return ObstacleMotion::two_body;
  if (s == "ballistic") return ObstacleMotion::ballistic;
  throw std::invalid_argument("unknown obstacle motion '" + s + "' (two_body, ballistic)");
}

inline const char* to_string(SurfaceVariant v) { return v == SurfaceVariant::rho_rho ? "rho_rho" : "rho_xi"; }

inline SurfaceVariant parse_surface_variant(const std::string& s) {
  if (s == "rho_rho") return SurfaceVariant::rho_rho;
  if (s == "rho_xi") return SurfaceVariant::rho_xi;
  throw std::invalid_argument("unknown surface variant '" + s + "' (rho_rho, rho_xi)");
}

}  // namespace rpo
