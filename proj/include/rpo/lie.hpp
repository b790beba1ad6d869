#pragma once

// SE(3)/SO(3) group and algebra operations.
//
// Conventions used throughout the library:
//   * A Pose maps body coordinates to the parent (inertial) frame:
//     x_parent = R * x_body + p.
//   * Twists are body-frame and stacked angular-first, xi = [omega; v],
//     with the left-trivialized kinematics  dH/dt = H * hat(xi).
//   * Wrenches are stacked torque-first, phi = [tau; f], dual to twists.
//   * Exponential coordinates rho = [gamma; b] use the same ordering.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rpo {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Body twist [omega; v].
using Twist = Vec6;
/// Body wrench [torque; force].
using Wrench = Vec6;
/// Exponential coordinates [gamma; b].
using ExpCoords = Vec6;

/// Raised when a logarithm or Jacobian is requested outside the principal
/// chart (rotation angle at or beyond pi).
class ChartError : public std::domain_error {
 public:
  explicit ChartError(const std::string& what) : std::domain_error(what) {}
};

inline Vec3 angular(const Vec6& x) { return x.head<3>(); }
inline Vec3 linear(const Vec6& x) { return x.tail<3>(); }

inline Vec6 stack(const Vec3& top, const Vec3& bottom) {
  Vec6 out;
  out << top, bottom;
  return out;
}

inline Mat3 hat3(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

inline Vec3 vee3(const Mat3& m) {
  return Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)) * 0.5;
}

inline Mat4 hat6(const Twist& xi) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat3(angular(xi));
  m.topRightCorner<3, 1>() = linear(xi);
  return m;
}

struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();

  static Pose identity() { return {}; }

  Pose inverse() const {
    Pose out;
    out.R = R.transpose();
    out.p = -(out.R * p);
    return out;
  }

  Vec3 act(const Vec3& x) const { return R * x + p; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = R;
    m.topRightCorner<3, 1>() = p;
    return m;
  }
};

inline Pose operator*(const Pose& a, const Pose& b) {
  Pose out;
  out.R = a.R * b.R;
  out.p = a.R * b.p + a.p;
  return out;
}

namespace detail {

// Below this angle every trigonometric coefficient switches to its
// 4th-order Taylor expansion.
inline constexpr double kSmallAngle = 1e-4;

// Coefficients whose closed form cancels catastrophically (error ~ eps/t^2
// or worse) keep a 6th-order series up to this angle.
inline constexpr double kCancellationAngle = 0.1;

// Coefficients of the SO(3) exponential family, each paired with a series
// for small theta. Names follow the power of theta they divide by.
struct SO3Coeffs {
  double a;  // sin(t)/t
  double b;  // (1 - cos t)/t^2
  double c;  // (t - sin t)/t^3
  double d;  // 1/t^2 - (1 + cos t)/(2 t sin t)
};

inline SO3Coeffs so3_coeffs(double t) {
  const double t2 = t * t;
  const double t4 = t2 * t2;
  if (t < kSmallAngle) {
    return {1.0 - t2 / 6.0 + t4 / 120.0,
            0.5 - t2 / 24.0 + t4 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0,
            1.0 / 12.0 + t2 / 720.0 + t4 / 30240.0};
  }
  const double s = std::sin(t);
  const double h = std::sin(0.5 * t);
  SO3Coeffs k{s / t, 2.0 * h * h / t2, 0.0, 0.0};
  if (t < kCancellationAngle) {
    const double t6 = t4 * t2;
    k.c = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0;
    k.d = 1.0 / 12.0 + t2 / 720.0 + t4 / 30240.0 + t6 / 1209600.0;
  } else {
    k.c = (t - s) / (t2 * t);
    k.d = 1.0 / t2 - (1.0 + std::cos(t)) / (2.0 * t * s);
  }
  return k;
}

}  // namespace detail

/// Rodrigues formula.
inline Mat3 exp_so3(const Vec3& gamma) {
  const double t = gamma.norm();
  const auto k = detail::so3_coeffs(t);
  const Mat3 g = hat3(gamma);
  return Mat3::Identity() + k.a * g + k.b * g * g;
}

/// Principal-branch logarithm. Throws ChartError when the rotation angle is
/// within `branch_tol` of pi, where the axis sign is ambiguous.
inline Vec3 log_so3(const Mat3& R, double branch_tol = 1e-9) {
  const double cos_t = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  if (cos_t <= -1.0 + branch_tol) {
    throw ChartError("log_so3: rotation angle at pi, logarithm branch is ambiguous");
  }
  const Vec3 w = vee3(R);  // sin(t) * axis
  const double t = std::atan2(w.norm(), cos_t);
  double scale;
  if (t < detail::kSmallAngle) {
    const double t2 = t * t;
    scale = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0;  // t / sin t
  } else {
    scale = t / std::sin(t);
  }
  return scale * w;
}

/// Left Jacobian of SO(3); also the translation factor V in exp_se3.
inline Mat3 left_jacobian_so3(const Vec3& gamma) {
  const auto k = detail::so3_coeffs(gamma.norm());
  const Mat3 g = hat3(gamma);
  return Mat3::Identity() + k.b * g + k.c * g * g;
}

inline Mat3 left_jacobian_inv_so3(const Vec3& gamma) {
  const auto k = detail::so3_coeffs(gamma.norm());
  const Mat3 g = hat3(gamma);
  return Mat3::Identity() - 0.5 * g + k.d * g * g;
}

inline Mat3 right_jacobian_inv_so3(const Vec3& gamma) {
  const auto k = detail::so3_coeffs(gamma.norm());
  const Mat3 g = hat3(gamma);
  return Mat3::Identity() + 0.5 * g + k.d * g * g;
}

inline Pose exp_se3(const ExpCoords& rho) {
  const Vec3 gamma = angular(rho);
  Pose out;
  out.R = exp_so3(gamma);
  out.p = left_jacobian_so3(gamma) * linear(rho);
  return out;
}

inline ExpCoords log_se3(const Pose& H, double branch_tol = 1e-9) {
  const Vec3 gamma = log_so3(H.R, branch_tol);
  return stack(gamma, left_jacobian_inv_so3(gamma) * H.p);
}

/// Ad_H acting on body twists: Ad_H xi = [R w; p x (R w) + R v].
inline Mat6 adjoint(const Pose& H) {
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = H.R;
  out.bottomRightCorner<3, 3>() = H.R;
  out.bottomLeftCorner<3, 3>() = hat3(H.p) * H.R;
  return out;
}

/// Algebra commutator matrix, ad_xi eta = [xi, eta].
inline Mat6 ad(const Twist& xi) {
  Mat6 out = Mat6::Zero();
  const Mat3 w = hat3(angular(xi));
  out.topLeftCorner<3, 3>() = w;
  out.bottomRightCorner<3, 3>() = w;
  out.bottomLeftCorner<3, 3>() = hat3(linear(xi));
  return out;
}

/// ad*_xi mu = ad_xi^T mu. With mu = P xi this is the gyroscopic wrench
/// [J w x w; m v x w].
inline Vec6 coad_star(const Twist& xi, const Vec6& mu) {
  const Vec3 w = angular(xi);
  const Vec3 v = linear(xi);
  const Vec3 mt = angular(mu);
  const Vec3 mf = linear(mu);
  return stack(mt.cross(w) + mf.cross(v), mf.cross(w));
}

namespace detail {

struct SE3QCoeffs {
  double c1;  // (t - sin t)/t^3
  double c2;  // (t^2 + 2 cos t - 2)/(2 t^4)
  double c3;  // (2t - 3 sin t + t cos t)/(2 t^5)
};

// The t^-4 and t^-5 closed forms lose about eps/t^4; below this angle the
// series truncated after t^10 is exact to rounding.
inline constexpr double kQSeriesAngle = 0.5;

inline SE3QCoeffs se3_q_coeffs(double t) {
  if (t < kQSeriesAngle) {
    // c1 = sum (-t^2)^k/(2k+3)!, c2 = sum (-t^2)^k/(2k+4)!,
    // c3 = sum (k+1)(-t^2)^k/(2k+5)!
    const double x = -t * t;
    double fact = 6.0;  // (2k+3)!
    double pw = 1.0;
    SE3QCoeffs q{0.0, 0.0, 0.0};
    for (int k = 0; k <= 5; ++k) {
      const double f4 = fact * (2 * k + 4);
      const double f5 = f4 * (2 * k + 5);
      q.c1 += pw / fact;
      q.c2 += pw / f4;
      q.c3 += (k + 1) * pw / f5;
      fact = f5;  // (2(k+1)+3)!
      pw *= x;
    }
    return q;
  }
  const double t2 = t * t;
  const double t4 = t2 * t2;
  const double s = std::sin(t);
  const double c = std::cos(t);
  return {(t - s) / (t2 * t), (t2 + 2.0 * c - 2.0) / (2.0 * t4), (2.0 * t - 3.0 * s + t * c) / (2.0 * t4 * t)};
}

// Off-diagonal block of the SE(3) left Jacobian (rotation first ordering).
inline Mat3 se3_q_block(const Vec3& phi, const Vec3& rho) {
  const auto [c1, c2, c3] = se3_q_coeffs(phi.norm());
  const Mat3 P = hat3(phi);
  const Mat3 Rh = hat3(rho);
  const Mat3 PR = P * Rh;
  const Mat3 RP = Rh * P;
  const Mat3 PRP = PR * P;
  const Mat3 PP = P * P;
  return 0.5 * Rh + c1 * (PR + RP + PRP) + c2 * (PP * Rh + RP * P - 3.0 * PRP) +
         c3 * (PRP * P + PP * Rh * P);
}

}  // namespace detail

/// G(rho) = inverse right Jacobian of the SE(3) exponential, so that
/// d/dt log(H) = G(log H) xi whenever dH/dt = H hat(xi).
inline Mat6 kinematics_jacobian(const ExpCoords& rho) {
  const Vec3 gamma = angular(rho);
  if (gamma.norm() >= std::numbers::pi) {
    throw ChartError("kinematics_jacobian: rotation angle outside the principal chart");
  }
  const Mat3 jinv = right_jacobian_inv_so3(gamma);
  const Mat3 q = detail::se3_q_block(-gamma, -linear(rho));
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = jinv;
  out.bottomRightCorner<3, 3>() = jinv;
  out.bottomLeftCorner<3, 3>() = -jinv * q * jinv;
  return out;
}

}  // namespace rpo
