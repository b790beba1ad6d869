// rpo: run rendezvous scenarios from the command line.
//
//   rpo simulate    <scenario.yaml> [--mode M] [--out DIR] [--seed N] [--dt S] [--t-end S]
//   rpo compare-apf <scenario.yaml> [--out DIR]
//   rpo sweep       <scenario.yaml> [--set key=v1,v2]... [--random-ics N --ic-seed S] [--jobs J] [--out FILE]
//
// Exit codes: 0 captured, 1 input error, 2 stalled, 3 collided, 4 timeout,
// 5 numerical failure (chart exit or divergence). compare-apf and sweep
// return 0 once every run completed.

#include "rpo/io.hpp"
#include "rpo/sim.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kInputError = 1;

int exit_code(rpo::Outcome o) {
  switch (o) {
    case rpo::Outcome::captured: return 0;
    case rpo::Outcome::stalled: return 2;
    case rpo::Outcome::collided: return 3;
    case rpo::Outcome::timeout: return 4;
    default: return 5;
  }
}

std::string default_out_dir() {
  const char* env = std::getenv("RPO_OUT_DIR");
  return env && *env ? env : "out";
}

void write_outputs(const fs::path& dir, const std::string& stem, const rpo::RunResult& r) {
  fs::create_directories(dir);
  rpo::write_trajectory_csv((dir / (stem + "trajectory.csv")).string(), r.trajectory);
  rpo::write_summary_json((dir / (stem + "summary.json")).string(), r.summary);
}

std::string fmt(double x, const char* spec = "%.3f") {
  if (!std::isfinite(x)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, x);
  return buf;
}

void print_summary(const rpo::RunSummary& s) {
  std::cout << "scenario      " << s.scenario << "\n"
            << "mode          " << rpo::to_string(s.mode) << "\n"
            << "outcome       " << rpo::to_string(s.outcome) << (s.message.empty() ? "" : " (" + s.message + ")")
            << "\n"
            << "final time    " << fmt(s.final_time, "%.2f") << " s\n"
            << "capture time  " << fmt(s.capture_time, "%.2f") << " s\n"
            << "reach time    " << fmt(s.reach_time, "%.2f") << " s (Tmax " << fmt(s.tmax, "%.2f") << " s)\n"
            << "min obstacle  " << fmt(s.min_obstacle_distance) << " m\n"
            << "path length   " << fmt(s.path_length) << " m\n";
}

struct SimulateArgs {
  std::string scenario;
  std::optional<std::string> mode;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_end;
};

int cmd_simulate(const SimulateArgs& a) {
  rpo::Scenario sc = rpo::load_scenario(a.scenario);
  if (a.mode) sc.mode = rpo::parse_guidance_mode(*a.mode);
  if (a.seed) sc.seed = *a.seed;
  if (a.dt) sc.dt = *a.dt;
  if (a.t_end) sc.t_end = *a.t_end;
  sc.validate();
  const rpo::RunResult r = rpo::run(sc);
  write_outputs(a.out, "", r);
  print_summary(r.summary);
  return exit_code(r.summary.outcome);
}

int cmd_compare(const std::string& path, const std::string& out) {
  const rpo::Scenario base = rpo::load_scenario(path);
  std::vector<rpo::Scenario> runs(2, base);
  runs[0].mode = rpo::GuidanceMode::conventional;
  runs[1].mode = rpo::GuidanceMode::physics_informed;
  const auto results = rpo::sweep(runs, 2);
  write_outputs(out, "conventional_", results[0]);
  write_outputs(out, "physics_informed_", results[1]);

  std::printf("%-18s %-10s %14s %16s %14s\n", "mode", "outcome", "capture_time_s", "min_obstacle_m",
              "path_length_m");
  for (const auto& r : results) {
    const auto& s = r.summary;
    std::printf("%-18s %-10s %14s %16s %14s\n", rpo::to_string(s.mode), rpo::to_string(s.outcome),
                fmt(s.capture_time, "%.2f").c_str(), fmt(s.min_obstacle_distance).c_str(),
                fmt(s.path_length).c_str());
  }
  for (const auto& r : results) {
    if (r.summary.outcome == rpo::Outcome::error) return kInputError;
  }
  return 0;
}

struct SweepArgs {
  std::string scenario;
  std::vector<std::string> axes;
  int random_ics = 0;
  std::uint64_t ic_seed = 1;
  unsigned jobs = 1;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  const std::string text = rpo::read_text_file(a.scenario);
  const YAML::Node base = rpo::parse_yaml_text(text, a.scenario);
  std::vector<rpo::GridAxis> axes;
  for (const auto& spec : a.axes) axes.push_back(rpo::parse_grid_axis(spec));
  const auto grid = rpo::expand_grid(base, a.scenario, axes);

  std::vector<rpo::Scenario> points;
  std::vector<std::string> labels;
  for (const auto& g : grid) {
    if (a.random_ics > 0) {
      const auto ics = rpo::random_initial_conditions(g.scenario, a.random_ics, a.ic_seed);
      for (std::size_t k = 0; k < ics.size(); ++k) {
        points.push_back(ics[k]);
        labels.push_back(g.label + (g.label.empty() ? "" : ";") + "ic=" + std::to_string(k));
      }
    } else {
      points.push_back(g.scenario);
      labels.push_back(g.label);
    }
  }

  const auto results = rpo::sweep(points, a.jobs, rpo::RunOptions{false});
  std::vector<rpo::RunSummary> summaries;
  for (const auto& r : results) summaries.push_back(r.summary);

  if (a.out.empty() || a.out == "-") {
    rpo::write_sweep_csv(std::cout, labels, summaries);
  } else {
    const fs::path p(a.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error(a.out + ": cannot open for writing");
    rpo::write_sweep_csv(f, labels, summaries);
    std::size_t failed = 0;
    for (const auto& s : summaries) failed += s.outcome == rpo::Outcome::error;
    std::cout << summaries.size() << " points written to " << a.out << " (" << failed << " failed)\n";
  }
  for (const auto& s : summaries) {
    if (s.outcome == rpo::Outcome::error) return kInputError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"6-DOF rendezvous simulator with potential-field guidance and fixed-time sliding mode control"};
  app.require_subcommand(1);

  SimulateArgs sim;
  sim.out = default_out_dir();
  auto* simulate = app.add_subcommand("simulate", "run one scenario and write trajectory.csv and summary.json");
  simulate->add_option("scenario", sim.scenario, "scenario YAML file")->required();
  simulate->add_option("--mode", sim.mode, "guidance mode: none, conventional, physics_informed");
  simulate->add_option("--out", sim.out, "output directory (default $RPO_OUT_DIR or ./out)");
  simulate->add_option("--seed", sim.seed, "override the scenario seed");
  simulate->add_option("--dt", sim.dt, "override the step size [s]");
  simulate->add_option("--t-end", sim.t_end, "override the final time [s]");

  std::string cmp_path;
  std::string cmp_out = default_out_dir();
  auto* compare = app.add_subcommand("compare-apf", "run conventional and physics-informed guidance side by side");
  compare->add_option("scenario", cmp_path, "scenario YAML file")->required();
  compare->add_option("--out", cmp_out, "output directory (default $RPO_OUT_DIR or ./out)");

  SweepArgs sw;
  sw.jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "run a grid of scenario variants and write one summary row per point");
  sweep->add_option("scenario", sw.scenario, "base scenario YAML file")->required();
  sweep->add_option("--set", sw.axes, "grid axis key=v1,v2,... over dotted scenario keys (repeatable)");
  sweep->add_option("--random-ics", sw.random_ics, "random initial conditions per grid point")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--ic-seed", sw.ic_seed, "seed for the random initial conditions");
  sweep->add_option("--jobs", sw.jobs, "concurrent runs")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sw.out, "summary CSV path, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*compare) return cmd_compare(cmp_path, cmp_out);
    if (*sweep) return cmd_sweep(sw);
  } catch (const rpo::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
