#pragma once

// Coupled rotational/translational rigid-body dynamics in a central gravity
// field, and the relative kinematics of a follower body with respect to a
// target body. Every quantity is expressed in the owning body's frame
// unless stated otherwise.

#include "rpo/lie.hpp"

#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace rpo {

struct BodyParams {
  double mass = 1.0;                   // kg
  Mat3 inertia = Mat3::Identity();     // kg m^2, body frame

  /// Throws std::invalid_argument when the parameters are not physical.
  void validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) {
      throw std::invalid_argument("body mass must be positive");
    }
    if (!inertia.allFinite() || (inertia - inertia.transpose()).norm() > 1e-9 * inertia.norm()) {
      throw std::invalid_argument("inertia must be a finite symmetric matrix");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
    const Vec3 ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0) {
      throw std::invalid_argument("inertia must be positive definite");
    }
    const double tol = 1e-12 * ev.maxCoeff();
    if (ev(0) + ev(1) < ev(2) - tol) {
      throw std::invalid_argument("principal moments violate the triangle inequality");
    }
  }
};

/// P = blockdiag(J, m I3).
inline Mat6 generalized_inertia(const BodyParams& b) {
  Mat6 P = Mat6::Zero();
  P.topLeftCorner<3, 3>() = b.inertia;
  P.bottomRightCorner<3, 3>() = b.mass * Mat3::Identity();
  return P;
}

/// Applies P^-1 blockwise.
inline Vec6 solve_inertia(const BodyParams& b, const Vec6& rhs) {
  return stack(b.inertia.ldlt().solve(angular(rhs)), linear(rhs) / b.mass);
}

inline double kinetic_energy(const BodyParams& b, const Twist& xi) {
  return 0.5 * xi.dot(generalized_inertia(b) * xi);
}

/// ad*_xi P xi for P = blockdiag(J, m I3). The top block's m v x v term is
/// zero but rounds to ~1e-16 m v^2 at orbital speed, so it is not formed.
inline Wrench gyroscopic_wrench(const BodyParams& b, const Twist& xi) {
  const Vec3 w = angular(xi);
  const Vec3 v = linear(xi);
  return stack((b.inertia * w).cross(w), b.mass * v.cross(w));
}

struct RigidBodyState {
  Pose pose;                      // body -> inertial
  Twist xi = Twist::Zero();       // body frame [omega; v]
};

/// Inertial velocity of the body origin.
inline Vec3 inertial_velocity(const RigidBodyState& s) { return s.pose.R * linear(s.xi); }

inline RigidBodyState from_inertial(const Pose& pose, const Vec3& v_inertial, const Vec3& omega_body) {
  return {pose, stack(omega_body, pose.R.transpose() * v_inertial)};
}

class SingularFieldError : public std::domain_error {
 public:
  explicit SingularFieldError(const std::string& what) : std::domain_error(what) {}
};

/// Point-mass gravity force and gravity-gradient torque, body frame.
inline Wrench gravity_wrench(const RigidBodyState& s, const BodyParams& b, double mu_earth) {
  const Vec3 r_b = s.pose.R.transpose() * s.pose.p;
  const double r = r_b.norm();
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw SingularFieldError("gravity_wrench: position at the attracting centre");
  }
  const double r2 = r * r;
  const double r3 = r2 * r;
  const Vec3 force = -(mu_earth * b.mass / r3) * r_b;
  const Vec3 torque = (3.0 * mu_earth / (r3 * r2)) * r_b.cross(b.inertia * r_b);
  return stack(torque, force);
}

/// Time derivative of a rigid-body state. The pose rate is the body twist
/// itself (dH/dt = H hat(xi)); p_dot and R_dot are its matrix form.
struct BodyRates {
  Twist pose_twist = Twist::Zero();
  Vec3 p_dot = Vec3::Zero();
  Mat3 R_dot = Mat3::Zero();
  Vec6 xi_dot = Vec6::Zero();
};

/// P xi_dot = ad*_xi P xi + sum(wrenches).
inline BodyRates body_derivative(const RigidBodyState& s, const BodyParams& b,
                                 std::span<const Wrench> wrenches) {
  Vec6 rhs = gyroscopic_wrench(b, s.xi);
  for (const auto& w : wrenches) rhs += w;
  BodyRates out;
  out.pose_twist = s.xi;
  out.p_dot = s.pose.R * linear(s.xi);
  out.R_dot = s.pose.R * hat3(angular(s.xi));
  out.xi_dot = solve_inertia(b, rhs);
  return out;
}

inline BodyRates body_derivative(const RigidBodyState& s, const BodyParams& b,
                                 std::initializer_list<Wrench> wrenches) {
  return body_derivative(s, b, std::span<const Wrench>(wrenches.begin(), wrenches.size()));
}

/// Follower dynamics: gravity, disturbance, control and guidance wrenches.
inline BodyRates follower_derivative(const RigidBodyState& s, const BodyParams& b,
                                     const Wrench& gravity, const Wrench& disturbance,
                                     const Wrench& control, const Wrench& apf) {
  return body_derivative(s, b, {gravity, disturbance, control, apf});
}

/// Configuration and velocity of the follower relative to the target,
/// expressed in the follower frame.
struct RelativeState {
  Pose H;                          // target^-1 * follower
  ExpCoords rho = ExpCoords::Zero();
  Twist xi = Twist::Zero();
};

inline RelativeState relative_pose(const RigidBodyState& target, const RigidBodyState& follower) {
  RelativeState out;
  out.H = target.pose.inverse() * follower.pose;
  out.rho = log_se3(out.H);
  out.xi = follower.xi - adjoint(out.H.inverse()) * target.xi;
  return out;
}

/// xi_rel_dot = xi_f_dot + ad_{xi_rel} Ad_{H^-1} xi_t - Ad_{H^-1} xi_t_dot.
inline Vec6 relative_acceleration(const Pose& H, const Twist& xi_rel, const Twist& xi_target,
                                  const Vec6& xi_target_dot, const Vec6& xi_follower_dot) {
  const Mat6 ad_inv = adjoint(H.inverse());
  return xi_follower_dot + ad(xi_rel) * (ad_inv * xi_target) - ad_inv * xi_target_dot;
}

/// Constant plus band-limited pseudo-random wrench. The random part is a
/// finite sum of sinusoids with frequencies below `cutoff_hz`, drawn once
/// from `seed`; it is a smooth deterministic function of time.
class Disturbance {
 public:
  Disturbance() = default;

  Disturbance(const Wrench& constant, double torque_amplitude, double force_amplitude,
              double cutoff_hz, std::uint64_t seed, int harmonics = 8)
      : constant_(constant) {
    if (harmonics <= 0 || !(cutoff_hz > 0.0)) {
      throw std::invalid_argument("disturbance needs positive harmonics and cutoff");
    }
    SplitMix64 rng(seed);
    const double norm = 1.0 / std::sqrt(static_cast<double>(harmonics));
    terms_.reserve(static_cast<std::size_t>(harmonics));
    for (int k = 0; k < harmonics; ++k) {
      Term t;
      for (int i = 0; i < 6; ++i) {
        const double amp = i < 3 ? torque_amplitude : force_amplitude;
        t.amplitude(i) = amp * norm * (2.0 * rng.uniform() - 1.0);
        t.phase(i) = 2.0 * std::numbers::pi * rng.uniform();
      }
      t.omega = 2.0 * std::numbers::pi * cutoff_hz * (0.05 + 0.95 * rng.uniform());
      terms_.push_back(t);
    }
  }

  Wrench operator()(double t) const {
    Wrench out = constant_;
    for (const auto& term : terms_) {
      for (int i = 0; i < 6; ++i) {
        out(i) += term.amplitude(i) * std::sin(term.omega * t + term.phase(i));
      }
    }
    return out;
  }

 private:
  // Fixed-definition generator so the signal is identical on every platform.
  struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t s) : state(s) {}
    std::uint64_t next() {
      std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  };

  struct Term {
    Vec6 amplitude = Vec6::Zero();
    Vec6 phase = Vec6::Zero();
    double omega = 0.0;
  };

  Wrench constant_ = Wrench::Zero();
  std::vector<Term> terms_;
};

}  // namespace rpo
