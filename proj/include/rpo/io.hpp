#pragma once

// Scenario files (YAML), trajectory CSV and run summaries (JSON).
//
// Scenario keys carry their SI unit as a suffix (dt_s, mass_kg, ...).
// Unknown keys are rejected; every error names file, line and column.

#include "rpo/scenario.hpp"
#include "rpo/sim.hpp"

#include <yaml-cpp/yaml.h>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rpo {

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string where(const std::string& source, const YAML::Mark& m) {
  if (m.is_null()) return source;
  return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

// Absent keys come back as null nodes; an explicit `~` is treated the same.
inline bool present(const YAML::Node& n) { return n.IsDefined() && !n.IsNull(); }

// Reads one YAML mapping, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class MapReader {
 public:
  MapReader(YAML::Node node, std::string path, std::string source)
      : node_(std::move(node)), path_(std::move(path)), source_(std::move(source)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    throw ScenarioError(where(source_, at.Mark()) + ": " + (path_.empty() ? "" : path_ + ": ") + msg);
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return has(key) ? node_[key] : YAML::Node();
  }

  template <class T>
  T scalar(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "'" + key + "' has an invalid value '" + n.Scalar() + "'");
    }
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    const YAML::Node n = raw(key);
    return present(n) ? scalar<T>(n, key) : fallback;
  }

  template <class T>
  T require(const std::string& key) {
    const YAML::Node n = raw(key);
    if (!present(n)) fail(node_, "missing required key '" + key + "'");
    return scalar<T>(n, key);
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) {
    const YAML::Node n = raw(key);
    if (!present(n)) return fallback;
    if (!n.IsSequence() || n.size() != 3) fail(n, "'" + key + "' must be a list of 3 numbers");
    Vec3 out;
    for (std::size_t i = 0; i < 3; ++i) out(static_cast<Eigen::Index>(i)) = scalar<double>(n[i], key);
    return out;
  }

  Mat3 inertia(const std::string& key, const Mat3& fallback) {
    const YAML::Node n = raw(key);
    if (!present(n)) return fallback;
    if (!n.IsSequence() || n.size() != 3) fail(n, "'" + key + "' must be 3 principal moments or a 3x3 matrix");
    if (n[0].IsScalar()) {
      Vec3 d;
      for (std::size_t i = 0; i < 3; ++i) d(static_cast<Eigen::Index>(i)) = scalar<double>(n[i], key);
      return d.asDiagonal();
    }
    Mat3 m;
    for (std::size_t r = 0; r < 3; ++r) {
      if (!n[r].IsSequence() || n[r].size() != 3) fail(n[r], "'" + key + "' rows must have 3 entries");
      for (std::size_t c = 0; c < 3; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = scalar<double>(n[r][c], key);
      }
    }
    return m;
  }

  MapReader child(const std::string& key) {
    return MapReader(raw(key), path_.empty() ? key : path_ + "." + key, source_);
  }

  /// Rejects keys that were never read.
  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(kv.first, "unknown key '" + key + "'");
    }
  }

  const std::string& source() const { return source_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::string source_;
  std::set<std::string> seen_;
};

inline void read_body(MapReader r, BodyParams& b) {
  b.mass = r.get<double>("mass_kg", b.mass);
  b.inertia = r.inertia("inertia_kg_m2", b.inertia);
  r.finish();
}

inline void read_disturbance(MapReader r, DisturbanceSpec& d) {
  d.torque = r.vec3("torque_n_m", d.torque);
  d.force = r.vec3("force_n", d.force);
  d.torque_amplitude = r.get<double>("torque_amplitude_n_m", d.torque_amplitude);
  d.force_amplitude = r.get<double>("force_amplitude_n", d.force_amplitude);
  d.cutoff_hz = r.get<double>("cutoff_hz", d.cutoff_hz);
  d.harmonics = r.get<int>("harmonics", d.harmonics);
  r.finish();
}

template <class Fn>
auto checked(const MapReader& r, const YAML::Node& at, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    r.fail(at, e.what());
  }
}

}  // namespace detail

/// Builds a Scenario from a parsed YAML document. `source` prefixes errors.
inline Scenario scenario_from_yaml(const YAML::Node& root, const std::string& source) {
  using detail::MapReader;
  if (!root || !root.IsMap()) {
    throw ScenarioError(detail::where(source, root.Mark()) + ": scenario must be a YAML mapping");
  }
  MapReader top(root, "", source);
  Scenario sc;
  sc.name = top.get<std::string>("name", sc.name);
  sc.seed = top.get<std::uint64_t>("seed", sc.seed);

  {
    auto r = top.child("integrator");
    sc.dt = r.get<double>("dt_s", sc.dt);
    sc.t_end = r.get<double>("t_end_s", sc.t_end);
    r.finish();
  }
  {
    auto r = top.child("orbit");
    sc.mu_earth = r.get<double>("mu_m3_s2", sc.mu_earth);
    const bool has_a = r.has("semi_major_axis_m");
    const bool has_T = r.has("period_s");
    if (has_a && has_T) r.fail(r.raw("period_s"), "give either semi_major_axis_m or period_s, not both");
    sc.orbit.a = r.get<double>("semi_major_axis_m", sc.orbit.a);
    if (has_T) {
      const double period = r.get<double>("period_s", 0.0);
      if (!(period > 0.0)) r.fail(r.raw("period_s"), "period_s must be positive");
      sc.orbit.a = semi_major_axis_for_period(period, sc.mu_earth);
    }
    sc.orbit.e = r.get<double>("eccentricity", sc.orbit.e);
    sc.orbit.i = r.get<double>("inclination_rad", sc.orbit.i);
    sc.orbit.raan = r.get<double>("raan_rad", sc.orbit.raan);
    sc.orbit.argp = r.get<double>("arg_perigee_rad", sc.orbit.argp);
    sc.orbit.nu = r.get<double>("true_anomaly_rad", sc.orbit.nu);
    r.finish();
  }
  detail::read_body(top.child("target"), sc.target);
  detail::read_body(top.child("follower"), sc.follower);
  {
    auto r = top.child("initial");
    sc.rho0 = stack(r.vec3("gamma_rad", angular(sc.rho0)), r.vec3("b_m", linear(sc.rho0)));
    sc.xi0 = stack(r.vec3("omega_rad_s", angular(sc.xi0)), r.vec3("v_m_s", linear(sc.xi0)));
    r.finish();
  }
  {
    auto r = top.child("guidance");
    if (r.has("mode")) {
      const YAML::Node n = r.raw("mode");
      sc.mode = detail::checked(r, n, [&] { return parse_guidance_mode(r.scalar<std::string>(n, "mode")); });
    }
    sc.apf.mu_a = r.get<double>("mu_a", sc.apf.mu_a);
    if (r.has("mu_a_vel")) sc.apf.mu_a_vel = r.get<double>("mu_a_vel", 0.0);
    sc.apf.mu_r = r.get<double>("mu_r", sc.apf.mu_r);
    sc.apf.v_min = r.get<double>("v_min_m_s", sc.apf.v_min);
    sc.apf.accel_window = r.get<double>("accel_window_s", sc.apf.accel_window);
    r.finish();
  }
  {
    auto r = top.child("obstacles");
    if (r.has("motion")) {
      const YAML::Node n = r.raw("motion");
      sc.obstacle_motion =
          detail::checked(r, n, [&] { return parse_obstacle_motion(r.scalar<std::string>(n, "motion")); });
    }
    const YAML::Node items = r.raw("items");
    if (detail::present(items)) {
      if (!items.IsSequence()) r.fail(items, "'items' must be a list");
      for (std::size_t i = 0; i < items.size(); ++i) {
        MapReader o(items[i], "obstacles.items[" + std::to_string(i) + "]", source);
        ObstacleSpec spec;
        spec.position = o.vec3("position_m", spec.position);
        spec.velocity = o.vec3("velocity_m_s", spec.velocity);
        spec.hard_radius = o.get<double>("hard_radius_m", spec.hard_radius);
        spec.influence_radius = o.get<double>("influence_radius_m", spec.influence_radius);
        o.finish();
        detail::checked(o, items[i], [&] {
          Obstacle{spec.position, spec.velocity, spec.hard_radius, spec.influence_radius}.validate();
          return 0;
        });
        sc.obstacles.push_back(spec);
      }
    }
    r.finish();
  }
  {
    auto r = top.child("control");
    if (r.has("surface")) {
      const YAML::Node n = r.raw("surface");
      sc.smc.variant =
          detail::checked(r, n, [&] { return parse_surface_variant(r.scalar<std::string>(n, "surface")); });
    }
    sc.smc.mu1 = r.get<double>("mu1", sc.smc.mu1);
    sc.smc.mu2 = r.get<double>("mu2", sc.smc.mu2);
    sc.smc.k1 = r.get<double>("k1", sc.smc.k1);
    sc.smc.k2 = r.get<double>("k2", sc.smc.k2);
    sc.smc.mus1 = r.get<double>("mu_s1", sc.smc.mus1);
    sc.smc.mus2 = r.get<double>("mu_s2", sc.smc.mus2);
    sc.smc.l1 = r.get<double>("l1", sc.smc.l1);
    sc.smc.l2 = r.get<double>("l2", sc.smc.l2);
    sc.smc.boundary_layer = r.get<double>("boundary_layer", sc.smc.boundary_layer);
    sc.smc.sat_eps = r.get<double>("sat_eps", sc.smc.sat_eps);
    sc.feed_disturbance = r.get<bool>("feed_disturbance", sc.feed_disturbance);
    r.finish();
  }
  {
    auto r = top.child("disturbance");
    detail::read_disturbance(r.child("follower"), sc.follower_disturbance);
    detail::read_disturbance(r.child("target"), sc.target_disturbance);
    r.finish();
  }
  {
    auto r = top.child("events");
    sc.events.capture_eps = r.get<double>("capture_eps_m", sc.events.capture_eps);
    sc.events.vel_eps = r.get<double>("vel_eps", sc.events.vel_eps);
    sc.events.terminate_on_capture = r.get<bool>("terminate_on_capture", sc.events.terminate_on_capture);
    sc.events.stall.window = r.get<double>("stall_window_s", sc.events.stall.window);
    sc.events.stall.speed_eps = r.get<double>("stall_speed_eps_m_s", sc.events.stall.speed_eps);
    sc.events.stall.goal_eps = r.get<double>("stall_goal_eps_m", sc.events.stall.goal_eps);
    sc.events.stall.force_eps = r.get<double>("stall_force_eps_n", sc.events.stall.force_eps);
    r.finish();
  }
  top.finish();

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(source + ": " + e.what());
  }
  return sc;
}

inline YAML::Node parse_yaml_text(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(detail::where(source, e.mark) + ": " + e.msg);
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario parse_scenario(const std::string& text, const std::string& source = "<string>") {
  return scenario_from_yaml(parse_yaml_text(text, source), source);
}

inline Scenario load_scenario(const std::string& path) { return parse_scenario(read_text_file(path), path); }

namespace detail {

inline YAML::Node seq3(const Vec3& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (int i = 0; i < 3; ++i) n.push_back(v(i));
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

inline YAML::Node inertia_node(const Mat3& J) {
  if (J.isDiagonal(0.0)) return seq3(J.diagonal());
  YAML::Node n(YAML::NodeType::Sequence);
  for (int r = 0; r < 3; ++r) n.push_back(seq3(J.row(r).transpose()));
  return n;
}

inline YAML::Node disturbance_node(const DisturbanceSpec& d) {
  YAML::Node n;
  n["torque_n_m"] = seq3(d.torque);
  n["force_n"] = seq3(d.force);
  n["torque_amplitude_n_m"] = d.torque_amplitude;
  n["force_amplitude_n"] = d.force_amplitude;
  n["cutoff_hz"] = d.cutoff_hz;
  n["harmonics"] = d.harmonics;
  return n;
}

}  // namespace detail

/// Normalized document: every key present, orbit given by semi-major axis.
inline YAML::Node scenario_to_yaml(const Scenario& sc) {
  YAML::Node root;
  root["name"] = sc.name;
  root["seed"] = sc.seed;
  root["integrator"]["dt_s"] = sc.dt;
  root["integrator"]["t_end_s"] = sc.t_end;
  auto orbit = root["orbit"];
  orbit["mu_m3_s2"] = sc.mu_earth;
  orbit["semi_major_axis_m"] = sc.orbit.a;
  orbit["eccentricity"] = sc.orbit.e;
  orbit["inclination_rad"] = sc.orbit.i;
  orbit["raan_rad"] = sc.orbit.raan;
  orbit["arg_perigee_rad"] = sc.orbit.argp;
  orbit["true_anomaly_rad"] = sc.orbit.nu;
  root["target"]["mass_kg"] = sc.target.mass;
  root["target"]["inertia_kg_m2"] = detail::inertia_node(sc.target.inertia);
  root["follower"]["mass_kg"] = sc.follower.mass;
  root["follower"]["inertia_kg_m2"] = detail::inertia_node(sc.follower.inertia);
  root["initial"]["gamma_rad"] = detail::seq3(angular(sc.rho0));
  root["initial"]["b_m"] = detail::seq3(linear(sc.rho0));
  root["initial"]["omega_rad_s"] = detail::seq3(angular(sc.xi0));
  root["initial"]["v_m_s"] = detail::seq3(linear(sc.xi0));
  auto g = root["guidance"];
  g["mode"] = to_string(sc.mode);
  g["mu_a"] = sc.apf.mu_a;
  if (sc.apf.mu_a_vel) g["mu_a_vel"] = *sc.apf.mu_a_vel;
  g["mu_r"] = sc.apf.mu_r;
  g["v_min_m_s"] = sc.apf.v_min;
  g["accel_window_s"] = sc.apf.accel_window;
  auto obs = root["obstacles"];
  obs["motion"] = to_string(sc.obstacle_motion);
  YAML::Node items(YAML::NodeType::Sequence);
  for (const auto& o : sc.obstacles) {
    YAML::Node n;
    n["position_m"] = detail::seq3(o.position);
    n["velocity_m_s"] = detail::seq3(o.velocity);
    n["hard_radius_m"] = o.hard_radius;
    n["influence_radius_m"] = o.influence_radius;
    items.push_back(n);
  }
  obs["items"] = items;
  auto c = root["control"];
  c["surface"] = to_string(sc.smc.variant);
  c["mu1"] = sc.smc.mu1;
  c["mu2"] = sc.smc.mu2;
  c["k1"] = sc.smc.k1;
  c["k2"] = sc.smc.k2;
  c["mu_s1"] = sc.smc.mus1;
  c["mu_s2"] = sc.smc.mus2;
  c["l1"] = sc.smc.l1;
  c["l2"] = sc.smc.l2;
  c["boundary_layer"] = sc.smc.boundary_layer;
  c["sat_eps"] = sc.smc.sat_eps;
  c["feed_disturbance"] = sc.feed_disturbance;
  root["disturbance"]["follower"] = detail::disturbance_node(sc.follower_disturbance);
  root["disturbance"]["target"] = detail::disturbance_node(sc.target_disturbance);
  auto ev = root["events"];
  ev["capture_eps_m"] = sc.events.capture_eps;
  ev["vel_eps"] = sc.events.vel_eps;
  ev["terminate_on_capture"] = sc.events.terminate_on_capture;
  ev["stall_window_s"] = sc.events.stall.window;
  ev["stall_speed_eps_m_s"] = sc.events.stall.speed_eps;
  ev["stall_goal_eps_m"] = sc.events.stall.goal_eps;
  ev["stall_force_eps_n"] = sc.events.stall.force_eps;
  return root;
}

inline std::string emit_scenario(const Scenario& sc) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << scenario_to_yaml(sc);
  return std::string(out.c_str()) + "\n";
}

/// Replaces the value at a dotted path ("control.mu_s1") with `value`,
/// itself parsed as YAML so lists like "[1, 2, 3]" work. Creates missing
/// intermediate maps; unknown leaves are caught when the document is loaded.
inline void apply_override(YAML::Node& root, const std::string& dotted, const std::string& value) {
  if (dotted.empty()) throw ScenarioError("override: empty key");
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    parts.push_back(dotted.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  YAML::Node parsed = parse_yaml_text(value, "override " + dotted);
  // Nodes are reference-like; walk with fresh handles to avoid rebinding.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (next && !next.IsMap() && !next.IsNull()) {
      throw ScenarioError("override " + dotted + ": '" + parts[i] + "' is not a section");
    }
    chain.push_back(next);
  }
  chain.back()[parts.back()] = parsed;
}

/// 17 significant digits, enough for the text to parse back to the same
/// double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline std::vector<std::string> trajectory_header(std::size_t n_obstacles) {
  std::vector<std::string> h{"t_s"};
  for (const char* body : {"target", "follower"}) {
    for (int r = 1; r <= 3; ++r) {
      for (int c = 1; c <= 3; ++c) h.push_back(std::string(body) + "_R" + std::to_string(r) + std::to_string(c));
    }
    for (const char* ax : {"x", "y", "z"}) h.push_back(std::string(body) + "_p" + ax + "_m");
  }
  const char* axes[] = {"x", "y", "z"};
  for (const auto* ax : axes) h.push_back(std::string("rho_gamma_") + ax + "_rad");
  for (const auto* ax : axes) h.push_back(std::string("rho_b_") + ax + "_m");
  for (const auto* ax : axes) h.push_back(std::string("xi_omega_") + ax + "_rad_s");
  for (const auto* ax : axes) h.push_back(std::string("xi_v_") + ax + "_m_s");
  for (int i = 1; i <= 6; ++i) h.push_back("s_" + std::to_string(i));
  for (const char* w : {"phi_c", "phi_apf"}) {
    for (const auto* ax : axes) h.push_back(std::string(w) + "_tau_" + ax + "_n_m");
    for (const auto* ax : axes) h.push_back(std::string(w) + "_f_" + ax + "_n");
  }
  for (std::size_t i = 1; i <= n_obstacles; ++i) h.push_back("dist_obs" + std::to_string(i) + "_m");
  h.push_back("V1");
  return h;
}

inline void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& rec) {
  const auto header = trajectory_header(rec.obstacle_count);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::string line;
  auto put = [&line](double v) {
    line += ',';
    line += format_double(v);
  };
  for (const auto& r : rec.rows) {
    line = format_double(r.t);
    for (const Pose* p : {&r.target, &r.follower}) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) put(p->R(i, j));
      }
      for (int i = 0; i < 3; ++i) put(p->p(i));
    }
    for (const Vec6* v : {&r.rho, &r.xi_rel, &r.s, &r.phi_c, &r.phi_apf}) {
      for (int i = 0; i < 6; ++i) put((*v)(i));
    }
    for (double d : r.distances) put(d);
    put(r.V1);
    out << line << '\n';
  }
}

inline void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  write_trajectory_csv(out, rec);
}

namespace detail {

inline nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); }

inline nlohmann::json vec_json(const Vec3& v) { return {v(0), v(1), v(2)}; }

}  // namespace detail

inline nlohmann::json summary_to_json(const RunSummary& s) {
  using detail::finite_or_null;
  nlohmann::json j;
  j["scenario"] = s.scenario;
  j["mode"] = to_string(s.mode);
  j["outcome"] = to_string(s.outcome);
  j["message"] = s.message;
  j["final_time_s"] = s.final_time;
  j["steps"] = s.steps;
  j["capture_time_s"] = finite_or_null(s.capture_time);
  j["min_obstacle_distance_m"] = finite_or_null(s.min_obstacle_distance);
  j["reach_time_s"] = finite_or_null(s.reach_time);
  j["max_s_after_reach"] = finite_or_null(s.max_s_after_reach);
  j["tmax_s"] = finite_or_null(s.tmax);
  j["terminal_speed_m_s"] = finite_or_null(s.terminal_speed);
  j["final_goal_distance_m"] = finite_or_null(s.final_goal_distance);
  j["path_length_m"] = s.path_length;
  j["steady_state"] = {{"max_abs_b_m", detail::vec_json(s.steady.b)},
                       {"max_abs_gamma_rad", detail::vec_json(s.steady.gamma)},
                       {"max_abs_v_m_s", detail::vec_json(s.steady.v)},
                       {"max_abs_omega_rad_s", detail::vec_json(s.steady.omega)}};
  return j;
}

inline void write_summary_json(const std::string& path, const RunSummary& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << summary_to_json(s).dump(2) << '\n';
}

/// One axis of a sweep grid: a dotted scenario key and its values.
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses "key=v1,v2,..." where values may be bracketed YAML lists.
inline GridAxis parse_grid_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ScenarioError("grid axis '" + spec + "' must look like key=v1,v2,...");
  }
  GridAxis axis;
  axis.key = spec.substr(0, eq);
  int depth = 0;
  std::string cur;
  for (char ch : spec.substr(eq + 1)) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (depth < 0) throw ScenarioError("grid axis '" + spec + "' has unbalanced brackets");
    if (ch == ',' && depth == 0) {
      axis.values.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (depth != 0) throw ScenarioError("grid axis '" + spec + "' has unbalanced brackets");
  axis.values.push_back(cur);
  for (const auto& v : axis.values) {
    if (v.empty()) throw ScenarioError("grid axis '" + spec + "' has an empty value");
  }
  return axis;
}

struct GridPoint {
  std::string label;  // "key=value;key=value"
  Scenario scenario;
};

/// Cartesian product of the axes applied to the base document, last axis
/// fastest. Each point is re-validated through the normal loader.
inline std::vector<GridPoint> expand_grid(const YAML::Node& base, const std::string& source,
                                          const std::vector<GridAxis>& axes) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  std::vector<GridPoint> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    YAML::Node doc = YAML::Clone(base);
    std::string label;
    std::size_t rem = idx;
    std::vector<std::size_t> pick(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      pick[a] = rem % axes[a].values.size();
      rem /= axes[a].values.size();
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
      apply_override(doc, axes[a].key, axes[a].values[pick[a]]);
      label += (a ? ";" : "") + axes[a].key + "=" + axes[a].values[pick[a]];
    }
    GridPoint p;
    p.label = label;
    p.scenario = scenario_from_yaml(doc, source + " [" + label + "]");
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<std::string> sweep_header() {
  return {"index", "label", "outcome", "capture_time_s", "reach_time_s", "tmax_s", "reach_ratio",
          "max_s_after_reach", "min_obstacle_distance_m", "final_time_s", "path_length_m",
          "max_abs_b_m", "max_abs_gamma_rad", "max_abs_v_m_s", "max_abs_omega_rad_s", "message"};
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_sweep_csv(std::ostream& out, const std::vector<std::string>& labels,
                            const std::vector<RunSummary>& rows) {
  const auto h = sweep_header();
  for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << h[i];
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i];
    const double ratio = s.reach_time / s.tmax;
    out << i << ',' << csv_quote(labels[i]) << ',' << to_string(s.outcome) << ',' << format_double(s.capture_time)
        << ',' << format_double(s.reach_time) << ',' << format_double(s.tmax) << ',' << format_double(ratio) << ','
        << format_double(s.max_s_after_reach) << ',' << format_double(s.min_obstacle_distance) << ','
        << format_double(s.final_time) << ',' << format_double(s.path_length) << ','
        << format_double(s.steady.b.maxCoeff()) << ',' << format_double(s.steady.gamma.maxCoeff()) << ','
        << format_double(s.steady.v.maxCoeff()) << ',' << format_double(s.steady.omega.maxCoeff()) << ','
        << csv_quote(s.message) << '\n';
  }
}

}  // namespace rpo
