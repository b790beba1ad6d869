#include "rpo/integrator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace rpo;

namespace {

const BodyParams kTumbler{3.0, Vec3(2.0, 3.0, 4.0).asDiagonal()};

MultiBodyRates torque_free(const MultiBodyState& x) {
  MultiBodyRates r;
  for (const auto& b : x.bodies) {
    const BodyRates br = body_derivative(b, kTumbler, std::span<const Wrench>{});
    r.twist.push_back(br.pose_twist);
    r.xi_dot.push_back(br.xi_dot);
  }
  r.aux_dot = Eigen::VectorXd::Zero(x.aux.size());
  return r;
}

MultiBodyState tumbling() {
  return {{RigidBodyState{Pose::identity(), stack(Vec3(1.0, 0.5, -0.7), Vec3(0.3, -0.1, 0.2))}}, {}};
}

MultiBodyState propagate(MultiBodyState x, double t_end, int steps) {
  const double dt = t_end / steps;
  for (int k = 0; k < steps; ++k) {
    x = rkmk4_step([](double, const MultiBodyState& s) { return torque_free(s); }, k * dt, x, dt);
  }
  return x;
}

double state_error(const MultiBodyState& a, const MultiBodyState& b) {
  const Pose d = b.bodies[0].pose.inverse() * a.bodies[0].pose;
  return log_se3(d).norm() + (a.bodies[0].xi - b.bodies[0].xi).norm();
}

}  // namespace

TEST(Rk4Step, ScalarExponentialDecay) {
  const double x1 = rk4_step([](double, double x) { return -x; }, 0.0, 1.0, 0.1);
  // one RK4 step reproduces the degree-4 Taylor polynomial of e^-h
  EXPECT_NEAR(x1, 1.0 - 0.1 + 0.005 - 0.1 / 600.0 + 0.0001 / 24.0, 1e-15);
  EXPECT_NEAR(x1, 0.9048375, 1e-15);
  // local truncation error h^5/120
  EXPECT_NEAR(x1, 0.90483742, 1e-7);
  EXPECT_NEAR(x1, std::exp(-0.1), 1e-7);
}

TEST(Rk4Step, TimeDependentQuadrature) {
  // x' = t^3 is integrated exactly by Simpson weights
  const double x1 = rk4_step([](double t, double) { return t * t * t; }, 1.0, 0.0, 0.5);
  EXPECT_NEAR(x1, (std::pow(1.5, 4) - 1.0) / 4.0, 1e-15);
}

TEST(Rk4Step, WorksOnEigenVectors) {
  // harmonic oscillator over one period
  Eigen::Vector2d x(1.0, 0.0);
  const int n = 200;
  const double dt = 2.0 * std::numbers::pi / n;
  for (int k = 0; k < n; ++k) {
    x = rk4_step([](double, const Eigen::Vector2d& s) { return Eigen::Vector2d(s(1), -s(0)); }, k * dt, x, dt);
  }
  EXPECT_LT((x - Eigen::Vector2d(1.0, 0.0)).norm(), 1e-7);
}

TEST(Rkmk4Step, ConstantDynamicsLeaveStateUnchanged) {
  const MultiBodyState x0{{RigidBodyState{Pose{exp_so3(Vec3(0.3, -0.2, 0.9)), Vec3(1, 2, 3)}, Twist::Zero()}},
                          Eigen::VectorXd::Constant(3, 2.5)};
  const MultiBodyState x1 = rkmk4_step(
      [](double, const MultiBodyState& s) {
        return MultiBodyRates{{Twist::Zero()}, {Vec6::Zero()}, Eigen::VectorXd::Zero(s.aux.size())};
      },
      0.0, x0, 0.1);
  EXPECT_EQ(x1.bodies[0].pose.R, x0.bodies[0].pose.R);
  EXPECT_EQ(x1.bodies[0].pose.p, x0.bodies[0].pose.p);
  EXPECT_EQ(x1.bodies[0].xi, x0.bodies[0].xi);
  EXPECT_EQ(x1.aux, x0.aux);
}

TEST(Rkmk4Step, ConstantTwistIsExactExponential) {
  const Twist xi(0.4, -0.1, 0.3, 1.0, 2.0, -0.5);
  MultiBodyState x{{RigidBodyState{Pose::identity(), xi}}, {}};
  auto f = [](double, const MultiBodyState& s) {
    return MultiBodyRates{{s.bodies[0].xi}, {Vec6::Zero()}, Eigen::VectorXd()};
  };
  for (int k = 0; k < 10; ++k) x = rkmk4_step(f, k * 0.3, x, 0.3);
  const Pose ref = exp_se3(3.0 * xi);
  EXPECT_LT((x.bodies[0].pose.matrix() - ref.matrix()).norm(), 1e-13);
}

TEST(Rkmk4Step, RotationStaysOrthonormal) {
  const MultiBodyState x = propagate(tumbling(), 500.0, 10000);
  const Mat3& R = x.bodies[0].pose.R;
  EXPECT_LT((R.transpose() * R - Mat3::Identity()).norm(), 1e-12);
  EXPECT_NEAR(R.determinant(), 1.0, 1e-12);
}

TEST(Rkmk4Step, FourthOrderRichardsonRatio) {
  const double T = 10.0;
  const MultiBodyState ref = propagate(tumbling(), T, 6400);
  const double e1 = state_error(propagate(tumbling(), T, 100), ref);
  const double e2 = state_error(propagate(tumbling(), T, 200), ref);
  const double ratio = e1 / e2;
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Rkmk4Step, NonFiniteDerivativeAborts) {
  const MultiBodyState x = tumbling();
  auto bad = [](double, const MultiBodyState&) {
    return MultiBodyRates{{Twist::Zero()}, {Vec6::Constant(std::numeric_limits<double>::quiet_NaN())},
                          Eigen::VectorXd()};
  };
  EXPECT_THROW(rkmk4_step(bad, 0.0, x, 0.1), IntegrationError);
}
