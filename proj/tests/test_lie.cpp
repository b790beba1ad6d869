#include "rpo/lie.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace rpo;
using rpo::testing::Rng;

namespace {

Twist vee6(const Mat4& m) { return stack(vee3(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>()); }

}  // namespace

TEST(Hat3, ZeroVectorGivesZeroMatrix) { EXPECT_EQ(hat3(Vec3::Zero()), Mat3::Zero()); }

TEST(Hat3, ActsAsCrossProduct) {
  EXPECT_EQ(hat3(Vec3::UnitX()) * Vec3::UnitY(), Vec3::UnitZ());
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vec3 w = rng.vec3(5.0);
    const Vec3 u = rng.vec3(5.0);
    EXPECT_LT((hat3(w) * u - w.cross(u)).norm(), 1e-13);
    EXPECT_LT((hat3(w) * u + hat3(u) * w).norm(), 1e-13);
    EXPECT_EQ(hat3(w).transpose(), -hat3(w));
    EXPECT_EQ(vee3(hat3(w)), w);
  }
}

TEST(ExpSO3, IdentityAtZero) { EXPECT_EQ(exp_so3(Vec3::Zero()), Mat3::Identity()); }

TEST(ExpSO3, QuarterTurnAboutZMapsXToY) {
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Mat3 R = exp_so3(Vec3(0, 0, std::numbers::pi / 2));
  EXPECT_LT((R - expected).norm(), 1e-15);
  EXPECT_LT((R * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
}

TEST(ExpSO3, MatchesAngleAxisAndIsOrthonormal) {
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const Vec3 g = rng.rotation_vector(3.1);
    const Mat3 R = exp_so3(g);
    const Mat3 ref = Eigen::AngleAxisd(g.norm(), g.normalized()).toRotationMatrix();
    EXPECT_LT((R - ref).norm(), 1e-14);
    EXPECT_LT((R.transpose() * R - Mat3::Identity()).norm(), 1e-14);
    EXPECT_NEAR(R.determinant(), 1.0, 1e-14);
    // rotation angle equals |gamma|
    EXPECT_NEAR(std::acos(std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0)), g.norm(), 1e-7);
  }
}

TEST(LogSO3, RoundTripOnPrincipalBranch) {
  Rng rng(3);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 g = rng.rotation_vector(3.0);
    worst = std::max(worst, (log_so3(exp_so3(g)) - g).norm());
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(LogSO3, RoundTripAcrossSmallAngleSwitch) {
  for (double t : {0.0, 1e-12, 1e-8, 9.99e-5, 1e-4, 1.001e-4, 1e-3}) {
    const Vec3 g = Vec3(0.3, -0.5, 0.8).normalized() * t;
    EXPECT_LT((log_so3(exp_so3(g)) - g).norm(), 1e-15 + 1e-12 * t) << t;
  }
}

TEST(LogSO3, RotationByPiIsRejected) {
  const Mat3 R = exp_so3(Vec3(0, 0, std::numbers::pi));
  EXPECT_THROW(log_so3(R), ChartError);
  EXPECT_THROW(log_se3(Pose{R, Vec3::Zero()}), ChartError);
}

TEST(ExpSE3, IdentityAndPureTranslation) {
  const Pose I = exp_se3(ExpCoords::Zero());
  EXPECT_EQ(I.R, Mat3::Identity());
  EXPECT_EQ(I.p, Vec3::Zero());
  const Pose T = exp_se3(stack(Vec3::Zero(), Vec3(1, -2, 3)));
  EXPECT_EQ(T.R, Mat3::Identity());
  EXPECT_EQ(T.p, Vec3(1, -2, 3));
}

TEST(ExpSE3, MatchesMatrixExponential) {
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const ExpCoords rho = stack(rng.rotation_vector(3.0), rng.vec3(5.0));
    const Mat4 ref = hat6(rho).exp();
    EXPECT_LT((exp_se3(rho).matrix() - ref).norm(), 1e-12);
  }
}

TEST(LogSE3, RoundTrip) {
  Rng rng(5);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const ExpCoords rho = stack(rng.rotation_vector(3.0), rng.vec3(10.0));
    worst = std::max(worst, (log_se3(exp_se3(rho)) - rho).norm());
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Adjoint, IdentityPose) { EXPECT_EQ(adjoint(Pose::identity()), Mat6::Identity()); }

TEST(Adjoint, MatchesConjugationOfHat) {
  Rng rng(6);
  for (int k = 0; k < 100; ++k) {
    const Pose H = rng.pose();
    const Twist xi = rng.vec6(2.0);
    const Twist ref = vee6(H.matrix() * hat6(xi) * H.matrix().inverse());
    EXPECT_LT((adjoint(H) * xi - ref).norm(), 1e-12);
  }
}

TEST(Adjoint, HomomorphismAndInverse) {
  Rng rng(7);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Pose A = rng.pose();
    const Pose B = rng.pose();
    worst = std::max(worst, (adjoint(A * B) - adjoint(A) * adjoint(B)).norm());
    EXPECT_LT((adjoint(A.inverse()) * adjoint(A) - Mat6::Identity()).norm(), 1e-12);
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(SmallAd, MatchesMatrixCommutator) {
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    const Twist a = rng.vec6(2.0);
    const Twist b = rng.vec6(2.0);
    const Twist ref = vee6(hat6(a) * hat6(b) - hat6(b) * hat6(a));
    EXPECT_LT((ad(a) * b - ref).norm(), 1e-13);
  }
}

TEST(CoadStar, IsTransposeOfAd) {
  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    const Twist xi = rng.vec6(2.0);
    const Vec6 mu = rng.vec6(2.0);
    EXPECT_LT((coad_star(xi, mu) - ad(xi).transpose() * mu).norm(), 1e-13);
  }
}

TEST(CoadStar, GyroscopicTermMatchesEulerEquation) {
  // J dOmega/dt = J Omega x Omega for a torque-free body.
  Mat3 J;
  J << 4, 0.2, 0.1, 0.2, 5, -0.3, 0.1, -0.3, 6;
  const Vec3 w(0.3, -0.7, 1.1);
  Mat6 P = Mat6::Zero();
  P.topLeftCorner<3, 3>() = J;
  P.bottomRightCorner<3, 3>() = 110.0 * Mat3::Identity();
  const Vec6 out = coad_star(stack(w, Vec3::Zero()), P * stack(w, Vec3::Zero()));
  EXPECT_LT((angular(out) - (J * w).cross(w)).norm(), 1e-14);
  EXPECT_EQ(linear(out), Vec3::Zero());
}

TEST(KinematicsJacobian, IdentityAtOrigin) { EXPECT_EQ(kinematics_jacobian(ExpCoords::Zero()), Mat6::Identity()); }

TEST(KinematicsJacobian, CommutingTranslationalFlow) {
  const ExpCoords rho = stack(Vec3::Zero(), Vec3(1.0, 2.0, -0.5));
  const Twist xi = stack(Vec3::Zero(), Vec3(0.2, 0.4, -0.1));
  EXPECT_LT((kinematics_jacobian(rho) * xi - xi).norm(), 1e-15);
  // Any flow along rho itself commutes with exp(rho).
  const ExpCoords r2(0.3, -0.2, 0.5, 1.0, 2.0, 3.0);
  EXPECT_LT((kinematics_jacobian(r2) * (0.7 * r2) - 0.7 * r2).norm(), 1e-14);
}

TEST(KinematicsJacobian, MatchesFiniteDifferencesOfLog) {
  Rng rng(10);
  const double h = 1e-6;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const ExpCoords rho = stack(rng.rotation_vector(2.8), rng.vec3(5.0));
    const Twist xi = rng.vec6(1.0);
    const Pose H = exp_se3(rho);
    const Vec6 fd = (log_se3(H * exp_se3(h * xi)) - log_se3(H * exp_se3(-h * xi))) / (2.0 * h);
    const Vec6 an = kinematics_jacobian(rho) * xi;
    worst = std::max(worst, (fd - an).norm() / std::max(1.0, an.norm()));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(KinematicsJacobian, InverseOfRightJacobianFromMatrixExponential) {
  // d/ds exp(rho + s delta)|0 = exp(rho) hat(Jr(rho) delta); G = Jr^-1.
  Rng rng(11);
  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    const ExpCoords rho = stack(rng.rotation_vector(2.5), rng.vec3(3.0));
    Mat6 Jr;
    const Mat4 Hinv = hat6(rho).exp().inverse();
    for (int c = 0; c < 6; ++c) {
      const Vec6 e = Vec6::Unit(c);
      const Mat4 d = (hat6(rho + h * e).exp() - hat6(rho - h * e).exp()) / (2.0 * h);
      Jr.col(c) = vee6(Hinv * d);
    }
    EXPECT_LT((kinematics_jacobian(rho) * Jr - Mat6::Identity()).norm(), 1e-7);
  }
}

TEST(KinematicsJacobian, ContinuousAcrossSeriesSwitch) {
  const Vec3 axis = Vec3(1, 2, -1).normalized();
  const Vec3 b(0.4, -1.2, 2.0);
  const Mat6 below = kinematics_jacobian(stack(axis * (1e-4 * (1 - 1e-9)), b));
  const Mat6 above = kinematics_jacobian(stack(axis * (1e-4 * (1 + 1e-9)), b));
  EXPECT_LT((below - above).norm(), 1e-11);
}

TEST(KinematicsJacobian, ContinuousAtCancellationSwitches) {
  const Vec3 axis = Vec3(-2, 1, 0.5).normalized();
  const Vec3 b(1.5, 0.2, -0.7);
  for (const double t : {detail::kCancellationAngle, detail::kQSeriesAngle}) {
    const Mat6 below = kinematics_jacobian(stack(axis * (t * (1 - 1e-12)), b));
    const Mat6 above = kinematics_jacobian(stack(axis * (t * (1 + 1e-12)), b));
    EXPECT_LT((below - above).norm(), 2e-12) << t;
  }
}

TEST(SeriesCoefficients, MatchHighPrecisionReference) {
  // t, sin t/t, (1-cos t)/t^2, (t-sin t)/t^3, 1/t^2-(1+cos t)/(2t sin t),
  // (t^2+2cos t-2)/(2t^4), (2t-3sin t+t cos t)/(2t^5); 50-digit arithmetic.
  const double ref[][7] = {
      {2e-4, 0.99999999333333334667, 0.49999999833333333556, 0.16666666633333333365, 0.083333333388888888942,
       0.041666666611111111151, 0.0083333333174603174735},
      {1e-3, 0.99999983333334166667, 0.49999995833333472222, 0.16666665833333353175, 0.083333334722222255291,
       0.041666665277777802579, 0.0083333329365079447751},
      {1e-2, 0.99998333341666646825, 0.49999583334722219742, 0.16666583333531745756, 0.08333347222255291088,
       0.041666527778025793375, 0.0083332936508763226511},
      {0.05, 0.9995833854135665759, 0.49989584201350137485, 0.16664583457336964108, 0.083336805762248368044,
       0.04166319459945005933, 0.0083323413215096776608},
      {0.0999, 0.9983374948077988082, 0.4995843045595156955, 0.16658351967595140654, 0.083347197752825933829,
       0.041652808011645729767, 0.0083293738352228166099},
      {0.1001, 0.99833083480542495542, 0.4995826390036636751, 0.16658318650131532578, 0.083347253334846466304,
       0.041652752475928157339, 0.0083293579688195044448},
      {0.5, 0.95885107720840600055, 0.48966975243850913553, 0.16459569116637599781, 0.083682635354059894959,
       0.041320990245963457861, 0.0082346421212377158124},
      {2.0, 0.4546487134128408477, 0.35403670913678559675, 0.13633782164678978808, 0.089476846016417324248,
       0.036490822715803600813, 0.0068720944754479709346},
  };
  for (const auto& r : ref) {
    const auto k = detail::so3_coeffs(r[0]);
    const auto q = detail::se3_q_coeffs(r[0]);
    EXPECT_NEAR(k.a, r[1], 1e-15) << r[0];
    EXPECT_NEAR(k.b, r[2], 1e-15) << r[0];
    EXPECT_NEAR(k.c, r[3], 5e-14) << r[0];
    EXPECT_NEAR(k.d, r[4], 5e-14) << r[0];
    EXPECT_NEAR(q.c1, r[3], 5e-14) << r[0];
    EXPECT_NEAR(q.c2, r[5], 5e-14) << r[0];
    EXPECT_NEAR(q.c3, r[6], 5e-13) << r[0];
  }
}

TEST(KinematicsJacobian, RejectsAngleOutsideChart) {
  EXPECT_THROW(kinematics_jacobian(stack(Vec3(0, 0, std::numbers::pi), Vec3::Zero())), ChartError);
  EXPECT_THROW(kinematics_jacobian(stack(Vec3(4.0, 0, 0), Vec3::Zero())), ChartError);
}

TEST(Pose, CompositionIsAssociativeAndInverts) {
  Rng rng(12);
  for (int k = 0; k < 50; ++k) {
    const Pose A = rng.pose(), B = rng.pose(), C = rng.pose();
    EXPECT_LT((((A * B) * C).matrix() - (A * (B * C)).matrix()).norm(), 1e-12);
    EXPECT_LT(((A * A.inverse()).matrix() - Mat4::Identity()).norm(), 1e-13);
  }
}
