#pragma once

// Fixed-step fourth-order integrators.
//
// rk4_step is the classical scheme on a vector space. rkmk4_step is its
// Runge-Kutta-Munthe-Kaas counterpart for states made of rigid bodies
// (SE(3) x R^6 each) plus an auxiliary Euclidean vector: body poses are
// advanced as H0 * exp(theta), where theta solves the chart ODE
// theta_dot = G(theta) xi with the same Butcher tableau. Poses therefore
// stay on the group to rounding and the scheme keeps global order four.

#include "rpo/dynamics.hpp"
#include "rpo/lie.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace rpo {

class IntegrationError : public std::runtime_error {
 public:
  explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

/// Classical RK4 for any type closed under + and scalar *.
/// `f(t, x)` returns dx/dt.
template <class X, class F>
X rk4_step(F&& f, double t, const X& x, double dt) {
  const X k1 = f(t, x);
  const X k2 = f(t + 0.5 * dt, X(x + (0.5 * dt) * k1));
  const X k3 = f(t + 0.5 * dt, X(x + (0.5 * dt) * k2));
  const X k4 = f(t + dt, X(x + dt * k3));
  return X(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

struct MultiBodyState {
  std::vector<RigidBodyState> bodies;
  Eigen::VectorXd aux;
};

struct MultiBodyRates {
  std::vector<Twist> twist;     // body-frame pose rate of each body
  std::vector<Vec6> xi_dot;
  Eigen::VectorXd aux_dot;
};

namespace detail {

inline void check_finite(const MultiBodyRates& r, double t) {
  bool ok = r.aux_dot.allFinite();
  for (std::size_t i = 0; ok && i < r.twist.size(); ++i) {
    ok = r.twist[i].allFinite() && r.xi_dot[i].allFinite();
  }
  if (!ok) {
    throw IntegrationError("non-finite derivative at t = " + std::to_string(t));
  }
}

}  // namespace detail

/// One RKMK4 step. `f(t, state)` returns MultiBodyRates with one entry per
/// body and an aux derivative of matching size.
template <class F>
MultiBodyState rkmk4_step(F&& f, double t, const MultiBodyState& x0, double dt) {
  const std::size_t n = x0.bodies.size();
  std::vector<Vec6> theta_rate[4];
  std::vector<Vec6> xi_rate[4];
  Eigen::VectorXd aux_rate[4];

  const double offsets[4] = {0.0, 0.5 * dt, 0.5 * dt, dt};
  MultiBodyState stage = x0;
  std::vector<Vec6> theta(n, Vec6::Zero());

  for (int k = 0; k < 4; ++k) {
    if (k > 0) {
      const double h = offsets[k];
      for (std::size_t i = 0; i < n; ++i) {
        theta[i] = h * theta_rate[k - 1][i];
        stage.bodies[i].pose = x0.bodies[i].pose * exp_se3(theta[i]);
        stage.bodies[i].xi = x0.bodies[i].xi + h * xi_rate[k - 1][i];
      }
      stage.aux = x0.aux + h * aux_rate[k - 1];
    }
    const MultiBodyRates r = f(t + offsets[k], stage);
    detail::check_finite(r, t + offsets[k]);
    theta_rate[k].resize(n);
    xi_rate[k] = r.xi_dot;
    aux_rate[k] = r.aux_dot;
    for (std::size_t i = 0; i < n; ++i) {
      theta_rate[k][i] = k == 0 ? r.twist[i] : Vec6(kinematics_jacobian(theta[i]) * r.twist[i]);
    }
  }

  MultiBodyState out = x0;
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec6 th = w * (theta_rate[0][i] + 2.0 * theta_rate[1][i] + 2.0 * theta_rate[2][i] +
                         theta_rate[3][i]);
    out.bodies[i].pose = x0.bodies[i].pose * exp_se3(th);
    out.bodies[i].xi =
        x0.bodies[i].xi + w * (xi_rate[0][i] + 2.0 * xi_rate[1][i] + 2.0 * xi_rate[2][i] + xi_rate[3][i]);
  }
  if (x0.aux.size() > 0) {
    out.aux = x0.aux + w * (aux_rate[0] + 2.0 * aux_rate[1] + 2.0 * aux_rate[2] + aux_rate[3]);
  }
  return out;
}

}  // namespace rpo
