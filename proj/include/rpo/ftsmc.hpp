#pragma once

// Non-singular fixed-time sliding mode control of the relative pose.
//
// With the default surface s = xi + mu1 sig^k1(rho) + mu2 sig^k2(rho) the
// control wrench cancels the gyroscopic, gravity, disturbance and target
// feed-through terms, so that the closed loop obeys
//   P_f ds/dt = -mu_s1 sig^l1(s) - mu_s2 sig^l2(s) + phi_apf.

#include "rpo/dynamics.hpp"
#include "rpo/lie.hpp"

#include <cmath>
#include <stdexcept>

namespace rpo {

enum class SurfaceVariant { rho_rho, rho_xi };

struct SmcGains {
  double mu1 = 0.1;
  double mu2 = 0.01;
  double k1 = 0.7;
  double k2 = 1.5;
  double mus1 = 1.0;
  double mus2 = 1.0;
  double l1 = 0.7;
  double l2 = 1.5;
  double boundary_layer = 1e-3;
  double sat_eps = 1e-6;
  SurfaceVariant variant = SurfaceVariant::rho_rho;

  void validate() const {
    if (!(mu1 > 0.0) || !(mu2 > 0.0) || !(mus1 > 0.0) || !(mus2 > 0.0)) {
      throw std::invalid_argument("sliding-mode gains must be positive");
    }
    if (!(k1 > 0.0 && k1 <= 1.0) || !(k2 > 1.0)) {
      throw std::invalid_argument("surface exponents need 0 < k1 <= 1 and k2 > 1");
    }
    if (!(l1 > 0.0 && l1 <= 1.0) || !(l2 > 1.0)) {
      throw std::invalid_argument("reaching exponents need 0 < l1 <= 1 and l2 > 1");
    }
    if (!(boundary_layer > 0.0) || !(sat_eps > 0.0)) {
      throw std::invalid_argument("boundary_layer and sat_eps must be positive");
    }
  }
};

inline double sig(double x, double a) { return std::copysign(std::pow(std::abs(x), a), x); }

template <class Derived>
auto sig(const Eigen::MatrixBase<Derived>& x, double a) {
  using Plain = typename Derived::PlainObject;
  Plain out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = sig(x(i), a);
  return out;
}

/// sig^a with a linear core of half-width `layer` when a < 0.25.
inline double sig_reaching(double x, double a, double layer) {
  if (a < 0.25 && std::abs(x) < layer) return x * std::pow(layer, a - 1.0);
  return sig(x, a);
}

/// mu_s1 sig^l1(s) + mu_s2 sig^l2(s).
inline Vec6 reaching_term(const Vec6& s, const SmcGains& g) {
  Vec6 out;
  for (int i = 0; i < 6; ++i) {
    out(i) = g.mus1 * sig_reaching(s(i), g.l1, g.boundary_layer) + g.mus2 * sig(s(i), g.l2);
  }
  return out;
}

inline Vec6 sliding_surface(const ExpCoords& rho, const Twist& xi_rel, const SmcGains& g) {
  if (g.variant == SurfaceVariant::rho_xi) {
    return xi_rel + g.mu1 * sig(rho, g.k1) + stack(Vec3::Zero(), g.mu2 * sig(linear(xi_rel), g.k2));
  }
  return xi_rel + g.mu1 * sig(rho, g.k1) + g.mu2 * sig(rho, g.k2);
}

/// Diagonal of Q1: mu1 k1 |rho_i|^(k1-1), with |rho_i| floored at sat_eps.
inline Vec6 q1_diagonal(const ExpCoords& rho, const SmcGains& g) {
  Vec6 q;
  for (int i = 0; i < 6; ++i) {
    q(i) = g.mu1 * g.k1 * std::pow(std::max(std::abs(rho(i)), g.sat_eps), g.k1 - 1.0);
  }
  return q;
}

/// Diagonal of Q2: mu2 k2 |x_i|^(k2-1).
inline Vec6 q2_diagonal(const Vec6& x, const SmcGains& g) {
  Vec6 q;
  for (int i = 0; i < 6; ++i) q(i) = g.mu2 * g.k2 * std::pow(std::abs(x(i)), g.k2 - 1.0);
  return q;
}

/// Everything the controller needs about the current instant.
struct ControlInputs {
  Pose H;                                  // relative configuration
  ExpCoords rho = ExpCoords::Zero();
  Twist xi_rel = Twist::Zero();
  Twist xi_f = Twist::Zero();
  Twist xi_t = Twist::Zero();
  Vec6 xi_t_dot = Vec6::Zero();
  Wrench gravity_f = Wrench::Zero();
  Wrench disturbance_estimate = Wrench::Zero();
  BodyParams follower;
};

inline ControlInputs make_control_inputs(const RigidBodyState& target, const RigidBodyState& follower,
                                         const Vec6& target_accel, const BodyParams& follower_params,
                                         const Wrench& gravity_f, const Wrench& disturbance_estimate) {
  const RelativeState rel = relative_pose(target, follower);
  ControlInputs in;
  in.H = rel.H;
  in.rho = rel.rho;
  in.xi_rel = rel.xi;
  in.xi_f = follower.xi;
  in.xi_t = target.xi;
  in.xi_t_dot = target_accel;
  in.gravity_f = gravity_f;
  in.disturbance_estimate = disturbance_estimate;
  in.follower = follower_params;
  return in;
}

/// Control wrench driving s to zero in fixed time.
inline Wrench control_wrench(const ControlInputs& in, const SmcGains& g) {
  const Mat6 P = generalized_inertia(in.follower);
  const Mat6 ad_inv = adjoint(in.H.inverse());
  const Vec6 feedthrough = ad(in.xi_rel) * (ad_inv * in.xi_t) - ad_inv * in.xi_t_dot;
  const Vec6 rho_dot = kinematics_jacobian(in.rho) * in.xi_rel;
  const Vec6 cancel = -gyroscopic_wrench(in.follower, in.xi_f) - in.gravity_f - in.disturbance_estimate;
  const Vec6 s = sliding_surface(in.rho, in.xi_rel, g);
  const Vec6 reach = reaching_term(s, g);

  if (g.variant == SurfaceVariant::rho_xi) {
    // ds/dt = (I + D) dxi/dt + Q1 rho_dot with D acting on the linear rows.
    Vec6 m = Vec6::Ones();
    m.tail<3>() += q2_diagonal(stack(Vec3::Zero(), linear(in.xi_rel)), g).tail<3>();
    const Vec6 desired =
        (solve_inertia(in.follower, -reach) - q1_diagonal(in.rho, g).cwiseProduct(rho_dot)).cwiseQuotient(m);
    return cancel + P * (desired - feedthrough);
  }

  const Vec6 q = q1_diagonal(in.rho, g) + q2_diagonal(in.rho, g);
  return cancel - P * (feedthrough + q.cwiseProduct(rho_dot)) - reach;
}

struct LyapunovConstants {
  double kt1 = 0.0;
  double kt2 = 0.0;
};

/// Constants of dV/dt <= -kt1 V^((l1+1)/2) - kt2 V^((l2+1)/2) for
/// V = s'P s / 2. Uses |s|^2 >= 2V/lambda_max(P) and, for the super-linear
/// term, sum |s_i|^(l2+1) >= 6^((1-l2)/2) |s|^(l2+1).
inline LyapunovConstants lyapunov_constants(const SmcGains& g, const Mat6& P) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(P);
  const double lmax = es.eigenvalues().maxCoeff();
  LyapunovConstants c;
  c.kt1 = g.mus1 * std::pow(2.0 / lmax, 0.5 * (g.l1 + 1.0));
  c.kt2 = g.mus2 * std::pow(6.0, 0.5 * (1.0 - g.l2)) * std::pow(2.0 / lmax, 0.5 * (g.l2 + 1.0));
  return c;
}

inline double settling_time_bound(double kt1, double kt2, double l1, double l2) {
  if (l1 >= 1.0 || l2 <= 1.0) {
    throw std::domain_error("settling time bound is infinite unless l1 < 1 < l2");
  }
  if (!(kt1 > 0.0) || !(kt2 > 0.0)) throw std::domain_error("settling constants must be positive");
  return 2.0 / (kt1 * (1.0 - l1)) + 2.0 / (kt2 * (l2 - 1.0));
}

inline double settling_time_bound(const SmcGains& g, const Mat6& P) {
  const auto c = lyapunov_constants(g, P);
  return settling_time_bound(c.kt1, c.kt2, g.l1, g.l2);
}

struct LyapunovDiagnostics {
  double V1 = 0.0;
  double V1_dot_bound = 0.0;
};

inline LyapunovDiagnostics lyapunov_diagnostics(const Vec6& s, const Mat6& P, const SmcGains& g) {
  const auto c = lyapunov_constants(g, P);
  LyapunovDiagnostics d;
  d.V1 = 0.5 * s.dot(P * s);
  d.V1_dot_bound = -c.kt1 * std::pow(d.V1, 0.5 * (g.l1 + 1.0)) - c.kt2 * std::pow(d.V1, 0.5 * (g.l2 + 1.0));
  return d;
}

}  // namespace rpo
