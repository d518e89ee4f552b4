// Command-line front end: run scenarios, the constraint sweep, and the
// built-in oracle checks.

#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "tompc/self_check.hpp"
#include "tompc/simulator.hpp"

namespace {

std::string default_sweep_scenario() { return std::string(TOMPC_SOURCE_DIR) + "/scenarios/scenario1_sphere.json"; }

int run_command(const std::string& file, const std::string& out, const std::string& mode, std::optional<unsigned> seed,
                bool diagnostics) {
  tompc::SimOverrides o;
  if (!mode.empty()) o.mode = tompc::control_mode_from_string(mode);
  o.seed = seed;
  return tompc::run_suite({file}, out, o, diagnostics, &std::cout);
}

int sweep_command(const std::string& which, const std::string& out, const std::string& scenario, bool diagnostics) {
  if (which != "table1") {
    std::cerr << "unknown sweep: " << which << '\n';
    return 2;
  }
  const auto results = tompc::run_table1(tompc::load_scenario(scenario), out, diagnostics);
  std::cout << std::left << std::setw(22) << "config" << std::setw(14) << "min_dist_m" << std::setw(14)
            << "avg_time_ms" << std::setw(14) << "max_time_ms" << '\n';
  int status = 0;
  for (const auto& r : results) {
    std::cout << std::setw(22) << r.label << std::setw(14) << r.metrics.min_distance << std::setw(14)
              << r.metrics.mean_cycle_time * 1e3 << std::setw(14) << r.metrics.max_cycle_time * 1e3 << '\n';
    if (r.log.aborted) status = 1;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-oriented whole-body MPC simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Simulate one scenario");
  std::string scenario_file, out_dir, mode;
  unsigned seed = 0;
  bool diagnostics = false;
  run->add_option("scenario", scenario_file, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--mode", mode, "Controller")->check(CLI::IsMember({"tompc", "oampc", "fddp", "id"}));
  auto* seed_opt = run->add_option("--seed", seed, "Noise seed");
  run->add_flag("--diagnostics", diagnostics, "Also write per-cycle diagnostics.csv");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  std::string which, sweep_out, sweep_scenario = default_sweep_scenario();
  bool sweep_diag = false;
  sweep->add_option("name", which, "Sweep name (table1)")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--scenario", sweep_scenario, "Base scenario")->check(CLI::ExistingFile);
  sweep->add_flag("--diagnostics", sweep_diag, "Also write per-cycle diagnostics.csv");

  auto* check = app.add_subcommand("check", "Run the derivative, solver and geometry oracle checks");
  std::string robot_file = std::string(TOMPC_SOURCE_DIR) + "/config/panda7.json";
  check->add_option("--robot", robot_file, "Robot JSON file")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) {
      std::optional<unsigned> s;
      if (*seed_opt) s = seed;
      return run_command(scenario_file, out_dir, mode, s, diagnostics);
    }
    if (*sweep) return sweep_command(which, sweep_out, sweep_scenario, sweep_diag);
    if (*check) {
      const auto report = tompc::run_self_check(tompc::load_robot(robot_file));
      for (const auto& c : report.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  (" << c.detail << ")\n";
      }
      return report.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
