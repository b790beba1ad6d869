#pragma once

// Keplerian elements <-> inertial Cartesian state, and LVLH attitude.

#include "rpo/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rpo {

inline constexpr double kMuEarth = 3.986004418e14;  // m^3/s^2
inline constexpr double kEarthRadius = 6.378137e6;  // m

struct OrbitalElements {
  double a = 0.0;      // semi-major axis, m
  double e = 0.0;
  double i = 0.0;      // inclination, rad
  double raan = 0.0;   // rad
  double argp = 0.0;   // argument of perigee, rad
  double nu = 0.0;     // true anomaly, rad
};

struct CartesianState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

inline double orbital_period(double a, double mu) {
  return 2.0 * std::numbers::pi * std::sqrt(a * a * a / mu);
}

inline double semi_major_axis_for_period(double period, double mu) {
  const double n = 2.0 * std::numbers::pi / period;
  return std::cbrt(mu / (n * n));
}

inline double specific_energy(const CartesianState& s, double mu) {
  return 0.5 * s.v.squaredNorm() - mu / s.r.norm();
}

inline CartesianState elements_to_cartesian(const OrbitalElements& el, double mu) {
  if (!(el.e >= 0.0 && el.e < 1.0)) {
    throw std::invalid_argument("only elliptic orbits (0 <= e < 1) are supported");
  }
  if (!(el.a > 0.0)) throw std::invalid_argument("semi-major axis must be positive");
  const double p = el.a * (1.0 - el.e * el.e);
  const double cn = std::cos(el.nu);
  const double sn = std::sin(el.nu);
  const double r = p / (1.0 + el.e * cn);
  const double k = std::sqrt(mu / p);
  const Vec3 r_pf(r * cn, r * sn, 0.0);
  const Vec3 v_pf(-k * sn, k * (el.e + cn), 0.0);
  const Mat3 Q = (Eigen::AngleAxisd(el.raan, Vec3::UnitZ()) * Eigen::AngleAxisd(el.i, Vec3::UnitX()) *
                  Eigen::AngleAxisd(el.argp, Vec3::UnitZ()))
                     .toRotationMatrix();
  return {Q * r_pf, Q * v_pf};
}

/// Inverse of elements_to_cartesian. Angles that are undefined for circular
/// or equatorial orbits are set to zero and absorbed into the next angle.
inline OrbitalElements cartesian_to_elements(const CartesianState& s, double mu) {
  const Vec3 h = s.r.cross(s.v);
  const double rn = s.r.norm();
  const Vec3 e_vec = s.v.cross(h) / mu - s.r / rn;
  const double energy = specific_energy(s, mu);
  if (!(energy < 0.0)) throw std::invalid_argument("state is not on an elliptic orbit");

  OrbitalElements el;
  el.a = -mu / (2.0 * energy);
  el.e = e_vec.norm();
  el.i = std::atan2(std::hypot(h.x(), h.y()), h.z());
  const Vec3 node = Vec3::UnitZ().cross(h);
  const double nn = node.norm();
  const double two_pi = 2.0 * std::numbers::pi;
  auto wrap = [two_pi](double x) { return x < 0.0 ? x + two_pi : x; };
  constexpr double tiny = 1e-11;

  const bool equatorial = nn < tiny * h.norm();
  const bool circular = el.e < tiny;
  const Vec3 hhat = h / h.norm();
  const Vec3 ref = equatorial ? Vec3::UnitX() : Vec3(node / nn);
  el.raan = equatorial ? 0.0 : wrap(std::atan2(node.y(), node.x()));

  auto angle_from = [&](const Vec3& from, const Vec3& to) {
    return wrap(std::atan2(hhat.dot(from.cross(to)), from.dot(to)));
  };
  if (circular) {
    el.argp = 0.0;
    el.nu = angle_from(ref, s.r);
  } else {
    el.argp = angle_from(ref, e_vec);
    el.nu = angle_from(e_vec, s.r);
  }
  return el;
}

/// Rotation whose columns are the LVLH axes: x radial out, z along the
/// orbit normal, y completing the triad (along-track for circular orbits).
inline Mat3 lvlh_rotation(const CartesianState& s) {
  const Vec3 x = s.r.normalized();
  const Vec3 z = s.r.cross(s.v).normalized();
  Mat3 R;
  R.col(0) = x;
  R.col(1) = z.cross(x);
  R.col(2) = z;
  return R;
}

/// Rigid body on the given orbit with its body frame aligned to LVLH and
/// rotating at the instantaneous orbital rate.
inline RigidBodyState elements_to_state(const OrbitalElements& el, double mu) {
  const CartesianState c = elements_to_cartesian(el, mu);
  const Mat3 R = lvlh_rotation(c);
  const double rate = c.r.cross(c.v).norm() / c.r.squaredNorm();
  return from_inertial(Pose{R, c.r}, c.v, Vec3(0.0, 0.0, rate));
}

inline CartesianState cartesian_of(const RigidBodyState& s) {
  return {s.pose.p, inertial_velocity(s)};
}

}  // namespace rpo
