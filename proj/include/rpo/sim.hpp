#pragma once

// Closed-loop propagation of target, follower and obstacles.
//
// Each step: form the relative state, evaluate guidance (held constant over
// the step), then advance everything with one RKMK4 step. The controller is
// re-evaluated at every stage of the step. Relative accelerations used by the
// physics-informed field come from a backward difference of inertial relative
// velocities over the configured window.

#include "rpo/apf.hpp"
#include "rpo/dynamics.hpp"
#include "rpo/ftsmc.hpp"
#include "rpo/integrator.hpp"
#include "rpo/orbit.hpp"
#include "rpo/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace rpo {

enum class Outcome { captured, collided, stalled, timeout, chart_exit, diverged, error };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::captured: return "captured";
    case Outcome::collided: return "collided";
    case Outcome::stalled: return "stalled";
    case Outcome::timeout: return "timeout";
    case Outcome::chart_exit: return "chart_exit";
    case Outcome::diverged: return "diverged";
    case Outcome::error: return "error";
  }
  return "?";
}

struct TrajectoryRow {
  double t = 0.0;
  Pose target;
  Pose follower;
  ExpCoords rho = ExpCoords::Zero();
  Twist xi_rel = Twist::Zero();
  Vec6 s = Vec6::Zero();
  Wrench phi_c = Wrench::Zero();
  Wrench phi_apf = Wrench::Zero();
  std::vector<double> distances;
  double V1 = 0.0;
  double H_a = 0.0;
  double H_r = 0.0;
};

struct TrajectoryRecord {
  std::size_t obstacle_count = 0;
  std::vector<TrajectoryRow> rows;
};

struct SteadyStateBounds {
  Vec3 b = Vec3::Zero();
  Vec3 gamma = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RunSummary {
  std::string scenario;
  GuidanceMode mode = GuidanceMode::none;
  Outcome outcome = Outcome::timeout;
  std::string message;
  double final_time = 0.0;
  double capture_time = kNaN;
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
  double reach_time = kNaN;            // first time |s|_inf < boundary_layer
  double max_s_after_reach = kNaN;
  double tmax = kNaN;
  double terminal_speed = kNaN;        // |relative linear velocity| at the end
  double path_length = 0.0;            // relative path travelled by the follower
  double final_goal_distance = kNaN;
  SteadyStateBounds steady;
  std::size_t steps = 0;
};

struct RunResult {
  TrajectoryRecord trajectory;
  RunSummary summary;
};

struct RunOptions {
  bool record = true;
};

namespace detail {

inline void append_obstacle_state(Eigen::VectorXd& aux, std::size_t i, const Vec3& p, const Vec3& v) {
  aux.segment<3>(static_cast<Eigen::Index>(6 * i)) = p;
  aux.segment<3>(static_cast<Eigen::Index>(6 * i + 3)) = v;
}

inline Vec3 obstacle_position(const Eigen::VectorXd& aux, std::size_t i) {
  return aux.segment<3>(static_cast<Eigen::Index>(6 * i));
}

inline Vec3 obstacle_velocity(const Eigen::VectorXd& aux, std::size_t i) {
  return aux.segment<3>(static_cast<Eigen::Index>(6 * i + 3));
}

}  // namespace detail

/// Target on its orbit, follower at exp(rho0) from it with relative twist xi0.
inline MultiBodyState initial_state(const Scenario& sc) {
  const RigidBodyState target = elements_to_state(sc.orbit, sc.mu_earth);
  RigidBodyState follower;
  follower.pose = target.pose * exp_se3(sc.rho0);
  const Pose H = target.pose.inverse() * follower.pose;
  follower.xi = sc.xi0 + adjoint(H.inverse()) * target.xi;

  MultiBodyState x;
  x.bodies = {target, follower};
  x.aux = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(6 * sc.obstacles.size()));
  const Vec3 v_t = inertial_velocity(target);
  const Vec3 w_t = angular(target.xi);
  for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
    const auto& o = sc.obstacles[i];
    const Vec3 p = target.pose.act(o.position);
    const Vec3 v = v_t + target.pose.R * (w_t.cross(o.position) + o.velocity);
    detail::append_obstacle_state(x.aux, i, p, v);
  }
  return x;
}

/// Closed-loop simulation of one scenario.
class Simulator {
 public:
  explicit Simulator(Scenario sc) : sc_(std::move(sc)) {
    sc_.validate();
    dist_f_ = sc_.follower_disturbance.build(sc_.seed);
    dist_t_ = sc_.target_disturbance.build(sc_.seed ^ 0x5DEECE66Dull);
    P_f_ = generalized_inertia(sc_.follower);
    tmax_ = settling_time_bound(sc_.smc, P_f_);
  }

  const Scenario& scenario() const { return sc_; }
  double tmax() const { return tmax_; }

  /// Body rates of the uncontrolled target.
  Vec6 target_accel(const RigidBodyState& T, double t) const {
    const Wrench g = gravity_wrench(T, sc_.target, sc_.mu_earth);
    return body_derivative(T, sc_.target, {g, dist_t_(t)}).xi_dot;
  }

  Wrench control(const RigidBodyState& T, const RigidBodyState& F, double t) const {
    const Wrench g_f = gravity_wrench(F, sc_.follower, sc_.mu_earth);
    const Wrench d_hat = sc_.feed_disturbance ? dist_f_(t) : Wrench::Zero();
    return control_wrench(make_control_inputs(T, F, target_accel(T, t), sc_.follower, g_f, d_hat), sc_.smc);
  }

  /// Full state derivative with the guidance wrench held at `apf`.
  MultiBodyRates derivative(double t, const MultiBodyState& x, const Wrench& apf) const {
    const RigidBodyState& T = x.bodies[0];
    const RigidBodyState& F = x.bodies[1];
    MultiBodyRates r;
    r.twist = {T.xi, F.xi};
    const Vec6 xt_dot = target_accel(T, t);
    const Wrench g_f = gravity_wrench(F, sc_.follower, sc_.mu_earth);
    const Wrench d_f = dist_f_(t);
    const Wrench d_hat = sc_.feed_disturbance ? d_f : Wrench::Zero();
    const Wrench u = control_wrench(make_control_inputs(T, F, xt_dot, sc_.follower, g_f, d_hat), sc_.smc);
    r.xi_dot = {xt_dot, follower_derivative(F, sc_.follower, g_f, d_f, u, apf).xi_dot};

    r.aux_dot.resize(x.aux.size());
    for (std::size_t i = 0; i < sc_.obstacles.size(); ++i) {
      const Vec3 p = detail::obstacle_position(x.aux, i);
      const Vec3 v = detail::obstacle_velocity(x.aux, i);
      Vec3 a = Vec3::Zero();
      if (sc_.obstacle_motion == ObstacleMotion::two_body) {
        const double rn = p.norm();
        a = -(sc_.mu_earth / (rn * rn * rn)) * p;
      }
      detail::append_obstacle_state(r.aux_dot, i, v, a);
    }
    return r;
  }

  RunResult run(const RunOptions& opt = {}) const;

 private:
  Scenario sc_;
  Disturbance dist_f_;
  Disturbance dist_t_;
  Mat6 P_f_;
  double tmax_ = kNaN;
};

inline RunResult Simulator::run(const RunOptions& opt) const {
  RunResult res;
  RunSummary& sum = res.summary;
  sum.scenario = sc_.name;
  sum.mode = sc_.mode;
  sum.tmax = tmax_;
  res.trajectory.obstacle_count = sc_.obstacles.size();

  const std::size_t n_obs = sc_.obstacles.size();
  const auto n_steps = static_cast<std::size_t>(std::llround(sc_.t_end / sc_.dt));
  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sc_.apf.accel_window / sc_.dt)));
  const double bl = sc_.smc.boundary_layer;

  MultiBodyState x = initial_state(sc_);
  LocalMinimumDetector detector(sc_.events.stall, sc_.dt);

  // Inertial relative velocities of the last `window` steps, newest last.
  struct VelocitySample {
    Vec3 v_r;
    std::vector<Vec3> v_o;
  };
  std::deque<VelocitySample> history;
  bool captured = false;
  bool have_prev_b = false;
  Vec3 prev_b = Vec3::Zero();
  double last_speed = kNaN;
  double last_goal = kNaN;

  auto finish = [&](Outcome o, double t, std::string msg = {}) {
    sum.outcome = o;
    sum.final_time = t;
    sum.message = std::move(msg);
  };

  std::size_t k = 0;
  for (;; ++k) {
    const double t = static_cast<double>(k) * sc_.dt;
    const RigidBodyState& T = x.bodies[0];
    const RigidBodyState& F = x.bodies[1];

    RelativeState rel;
    try {
      rel = relative_pose(T, F);
    } catch (const ChartError& e) {
      finish(Outcome::chart_exit, t, e.what());
      break;
    }

    // Inertial geometry for guidance.
    const Vec3 v_t = inertial_velocity(T);
    const Vec3 v_f = inertial_velocity(F);
    TargetKinematics tk;
    tk.b = T.pose.p - F.pose.p;
    tk.v_r = v_t - v_f;
    std::vector<ObstacleKinematics> obs(n_obs);
    std::vector<double> dist(n_obs);
    bool hit = false;
    for (std::size_t i = 0; i < n_obs; ++i) {
      obs[i].b_o = F.pose.p - detail::obstacle_position(x.aux, i);
      obs[i].v_o = v_f - detail::obstacle_velocity(x.aux, i);
      obs[i].hard_radius = sc_.obstacles[i].hard_radius;
      obs[i].influence_radius = sc_.obstacles[i].influence_radius;
      dist[i] = obs[i].b_o.norm();
      sum.min_obstacle_distance = std::min(sum.min_obstacle_distance, dist[i]);
      hit = hit || dist[i] <= obs[i].hard_radius;
    }
    if (!history.empty()) {
      const auto& old = history.front();
      const double span = static_cast<double>(history.size()) * sc_.dt;
      tk.a_r = (tk.v_r - old.v_r) / span;
      for (std::size_t i = 0; i < n_obs; ++i) obs[i].a_o = (obs[i].v_o - old.v_o[i]) / span;
    }
    history.push_back({tk.v_r, {}});
    for (const auto& o : obs) history.back().v_o.push_back(o.v_o);
    if (history.size() > window) history.pop_front();

    ApfOutput apf_inertial;
    if (!hit) {
      switch (sc_.mode) {
        case GuidanceMode::none:
          apf_inertial.diagnostics = guidance_diagnostics(tk, obs, sc_.apf);
          break;
        case GuidanceMode::conventional:
          apf_inertial = conventional_apf_total(tk, obs, sc_.apf);
          break;
        case GuidanceMode::physics_informed:
          apf_inertial = pi_apf_total(tk, obs, sc_.apf);
          break;
      }
    }
    const Wrench apf = stack(Vec3::Zero(), F.pose.R.transpose() * linear(apf_inertial.wrench));

    const Vec6 s = sliding_surface(rel.rho, rel.xi, sc_.smc);
    const double s_inf = s.cwiseAbs().maxCoeff();
    if (std::isnan(sum.reach_time)) {
      if (s_inf < bl) {
        sum.reach_time = t;
        sum.max_s_after_reach = s_inf;
      }
    } else {
      sum.max_s_after_reach = std::max(sum.max_s_after_reach, s_inf);
    }

    if (have_prev_b) sum.path_length += (tk.b - prev_b).norm();
    prev_b = tk.b;
    have_prev_b = true;
    last_speed = linear(rel.xi).norm();
    last_goal = tk.b.norm();

    if (opt.record) {
      TrajectoryRow row;
      row.t = t;
      row.target = T.pose;
      row.follower = F.pose;
      row.rho = rel.rho;
      row.xi_rel = rel.xi;
      row.s = s;
      row.phi_c = control(T, F, t);
      row.phi_apf = apf;
      row.distances = dist;
      row.V1 = 0.5 * s.dot(P_f_ * s);
      row.H_a = apf_inertial.diagnostics.H_a;
      row.H_r = apf_inertial.diagnostics.H_r;
      res.trajectory.rows.push_back(std::move(row));
    }
    sum.steps = k;

    if (hit) {
      finish(Outcome::collided, t, "obstacle hard radius violated");
      break;
    }
    if (!captured && linear(rel.rho).norm() < sc_.events.capture_eps && rel.xi.norm() < sc_.events.vel_eps) {
      captured = true;
      sum.capture_time = t;
      if (sc_.events.terminate_on_capture) {
        finish(Outcome::captured, t);
        break;
      }
    }
    // Speed is taken in the target frame: station keeping on orbit still has an
    // inertial relative speed of about n |b|.
    detector.push(linear(rel.xi).norm(), tk.b.norm(), sc_.follower.mass * tk.a_r.norm());
    if (!captured && sc_.mode != GuidanceMode::none && detector.triggered()) {
      finish(Outcome::stalled, t, "local minimum detected");
      break;
    }
    if (k >= n_steps) {
      finish(captured ? Outcome::captured : Outcome::timeout, t);
      break;
    }

    try {
      x = rkmk4_step([&](double tau, const MultiBodyState& xs) { return derivative(tau, xs, apf); }, t, x,
                     sc_.dt);
    } catch (const ChartError& e) {
      finish(Outcome::chart_exit, t, e.what());
      break;
    } catch (const std::exception& e) {
      finish(Outcome::diverged, t, e.what());
      break;
    }
  }

  sum.terminal_speed = last_speed;
  sum.final_goal_distance = last_goal;

  const auto& rows = res.trajectory.rows;
  if (!rows.empty()) {
    const std::size_t start = (rows.size() * 4) / 5;
    for (std::size_t i = start; i < rows.size(); ++i) {
      const auto& r = rows[i];
      sum.steady.b = sum.steady.b.cwiseMax(linear(r.rho).cwiseAbs());
      sum.steady.gamma = sum.steady.gamma.cwiseMax(angular(r.rho).cwiseAbs());
      sum.steady.v = sum.steady.v.cwiseMax(linear(r.xi_rel).cwiseAbs());
      sum.steady.omega = sum.steady.omega.cwiseMax(angular(r.xi_rel).cwiseAbs());
    }
  }
  return res;
}

inline RunResult run(const Scenario& sc, const RunOptions& opt = {}) { return Simulator(sc).run(opt); }

/// Runs every scenario, `jobs` at a time. Result i always belongs to
/// scenario i; a failing run is reported in its own summary.
inline std::vector<RunResult> sweep(const std::vector<Scenario>& points, unsigned jobs,
                                    const RunOptions& opt = {}) {
  std::vector<RunResult> out(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        out[i] = run(points[i], opt);
      } catch (const std::exception& e) {
        out[i].summary.scenario = points[i].name;
        out[i].summary.mode = points[i].mode;
        out[i].summary.outcome = Outcome::error;
        out[i].summary.message = e.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, points.size()))));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

/// Half-widths of the box from which random initial conditions are drawn.
struct InitialConditionBox {
  Vec3 gamma{0.3, 0.3, 0.3};       // rad
  Vec3 b{15.0, 15.0, 15.0};        // m
  Vec3 omega{0.01, 0.01, 0.01};    // rad/s
  Vec3 v{0.05, 0.05, 0.05};        // m/s
};

/// Copies of `base` with uniformly drawn rho0/xi0. Uses raw mt19937_64 output
/// so the draws are identical across standard library implementations.
inline std::vector<Scenario> random_initial_conditions(const Scenario& base, int n, std::uint64_t seed,
                                                       const InitialConditionBox& box = {}) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 0; k < n; ++k) {
    Scenario sc = base;
    sc.name = base.name + "#" + std::to_string(k);
    for (int i = 0; i < 3; ++i) sc.rho0(i) = box.gamma(i) * uniform();
    for (int i = 0; i < 3; ++i) sc.rho0(3 + i) = box.b(i) * uniform();
    for (int i = 0; i < 3; ++i) sc.xi0(i) = box.omega(i) * uniform();
    for (int i = 0; i < 3; ++i) sc.xi0(3 + i) = box.v(i) * uniform();
    sc.seed = base.seed + static_cast<std::uint64_t>(k);
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace rpo
