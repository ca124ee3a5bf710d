#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cleftsim/scenario.hpp"

// cleftsim: synaptic cleft reaction-diffusion simulator.
//   run <scenario.json>        all selected solvers, CSV + report + plot
//   compare <a.csv> <b.csv>    deviation metrics between two bound-count series
//   calibrate <scenario.json>  fit kappa_a from the particle simulator
// Exit codes: 0 success, 2 validation/parse error, 3 solver error.

namespace {

void print_report(const cleft::ScenarioOutputs& outputs) {
  for (const auto& c : outputs.report.curves) {
    std::printf("%-36s peak=%.17g at t=%.17g us  steady=%.17g\n", c.label.c_str(), c.peak,
                c.t_peak, c.steady_state);
  }
  for (const auto& d : outputs.report.deviations) {
    std::printf("deviation %s vs %s: max_abs=%.17g peak_rel=%.17g\n", d.a.c_str(), d.b.c_str(),
                d.max_abs, d.peak_rel);
  }
  for (const auto& [label, seconds] : outputs.report.runtimes_s) {
    std::printf("runtime %-28s %.3f s\n", label.c_str(), seconds);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synaptic cleft reaction-diffusion simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", solvers_arg, a_path, b_path;
  std::uint64_t seed = 1;
  std::size_t runs = 0;

  CLI::App* run = app.add_subcommand("run", "run a scenario with the selected solvers");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--solvers", solvers_arg, "comma-separated subset of ssd,pbs,oracle");
  run->add_option("--seed", seed, "base RNG seed for particle runs");
  run->add_option("--runs", runs, "override particle repetition count");

  CLI::App* cmp = app.add_subcommand("compare", "deviation metrics between two series CSVs");
  cmp->add_option("a", a_path, "first CSV")->required();
  cmp->add_option("b", b_path, "second CSV")->required();

  CLI::App* cal = app.add_subcommand("calibrate", "fit kappa_a from particle steady state");
  cal->add_option("scenario", scenario_path, "scenario JSON file")->required();
  cal->add_option("--out", out_dir, "output directory (writes calibration.json)");
  cal->add_option("--seed", seed, "base RNG seed");
  cal->add_option("--runs", runs, "override particle repetition count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const cleft::Scenario scenario = cleft::load_scenario(scenario_path);
      cleft::RunOptions options;
      options.out_dir = out_dir;
      options.seed = seed;
      options.runs_override = runs;
      if (!solvers_arg.empty()) {
        std::stringstream ss(solvers_arg);
        std::string item;
        while (std::getline(ss, item, ',')) options.solver_override.push_back(item);
      }
      // A previous `calibrate` into the same directory feeds the
      // deterministic solvers.
      const std::filesystem::path calib = std::filesystem::path(out_dir) / "calibration.json";
      if (std::filesystem::exists(calib)) {
        std::ifstream is(calib);
        cleft::njson j;
        is >> j;
        options.kappa_a_override = j.value("kappa_a_measured", 0.0);
        std::printf("using calibrated kappa_a = %.17g from %s\n", options.kappa_a_override,
                    calib.string().c_str());
      }
      const cleft::ScenarioOutputs outputs = cleft::run_scenario(scenario, options);
      print_report(outputs);
      std::printf("wrote %zu curves to %s\n", outputs.curves.size(), out_dir.c_str());
      return 0;
    }
    if (cmp->parsed()) {
      const cleft::TimeSeries a = cleft::read_csv_file(a_path);
      const cleft::TimeSeries b = cleft::read_csv_file(b_path);
      const cleft::DeviationMetrics m = cleft::compare(a, b);
      std::printf("max_abs=%.17g\npeak_rel=%.17g\n", m.max_abs, m.peak_rel);
      return 0;
    }
    if (cal->parsed()) {
      const cleft::Scenario scenario = cleft::load_scenario(scenario_path);
      const cleft::ValidatedConfig cfg = cleft::validate(scenario.config);
      const cleft::CalibrationResult result =
          cleft::calibrate_kappa_a(cfg, seed, runs == 0 ? cfg.disc().n_runs : runs);
      std::printf("steady_state=%.17g (se %.17g, %zu runs)\n", result.steady_state_mean,
                  result.steady_state_se, result.runs);
      std::printf("kappa_a_measured=%.17g\nkappa_a_helper=%.17g\nratio=%.17g\n",
                  result.kappa_a_measured, result.kappa_a_helper,
                  result.kappa_a_measured / result.kappa_a_helper);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        cleft::njson j = {{"kappa_a_measured", result.kappa_a_measured},
                          {"kappa_a_helper", result.kappa_a_helper},
                          {"steady_state_mean", result.steady_state_mean},
                          {"steady_state_se", result.steady_state_se},
                          {"runs", result.runs},
                          {"seed", seed}};
        std::ofstream os(std::filesystem::path(out_dir) / "calibration.json");
        os << j.dump(2) << "\n";
      }
      return 0;
    }
  } catch (const cleft::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const cleft::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
