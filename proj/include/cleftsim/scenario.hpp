#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cleftsim/config.hpp"
#include "cleftsim/config_io.hpp"
#include "cleftsim/errors.hpp"
#include "cleftsim/oracle.hpp"
#include "cleftsim/pbs.hpp"
#include "cleftsim/ssd.hpp"
#include "cleftsim/svg_plot.hpp"
#include "cleftsim/time_series.hpp"

namespace cleft {

struct SweepAxis {
  std::string parameter;  // "C_star" | "N" | "kappa_a0"
  std::vector<double> values;
};

struct Scenario {
  std::string name;
  ModelConfig config;
  std::vector<std::string> solvers;  // subset of {"ssd", "pbs", "oracle"}
  std::optional<SweepAxis> sweep;
  bool saturation_compare = false;  // also run every point with saturation off
};

inline bool is_known_solver(const std::string& s) {
  return s == "ssd" || s == "pbs" || s == "oracle";
}

/// Applies one sweep value to a copy of the base config.
inline ModelConfig apply_sweep_value(const ModelConfig& base, const std::string& parameter,
                                     double value) {
  ModelConfig c = base;
  if (parameter == "C_star") {
    c.kinetics.C_star = value;
  } else if (parameter == "N") {
    for (auto& ev : c.schedule.events) ev.count = value;
  } else if (parameter == "kappa_a0") {
    c.kinetics.kappa_a0 = value;
    c.kinetics.kappa_a = 0.0;  // re-derive
  } else {
    throw ValidationError("unknown sweep parameter '" + parameter + "'");
  }
  return c;
}

inline Scenario scenario_from_json(const njson& j, const std::string& origin) {
  Scenario s;
  try {
    s.name = io_detail::get_or<std::string>(j, "name", "scenario");
    if (!j.contains("config")) throw ParseError(origin + ": missing 'config'");
    s.config = config_from_json(j.at("config"));
    if (j.contains("solvers")) {
      for (const njson& v : j.at("solvers")) s.solvers.push_back(v.get<std::string>());
    } else {
      s.solvers = {"ssd"};
    }
    if (j.contains("sweep")) {
      SweepAxis axis;
      axis.parameter = j.at("sweep").at("parameter").get<std::string>();
      for (const njson& v : j.at("sweep").at("values")) axis.values.push_back(v.get<double>());
      s.sweep = axis;
    }
    s.saturation_compare = io_detail::get_or(j, "saturation_compare", false);
  } catch (const njson::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }

  if (s.solvers.empty()) throw ValidationError(origin + ": empty solver set");
  for (const auto& solver : s.solvers) {
    if (!is_known_solver(solver)) {
      throw ValidationError(origin + ": unknown solver '" + solver + "'");
    }
  }
  if (s.sweep) {
    for (double v : s.sweep->values) {
      if (!(v > 0.0)) throw ValidationError(origin + ": sweep values must be positive");
    }
    // Must name a recognized config field.
    apply_sweep_value(s.config, s.sweep->parameter, s.sweep->values.empty()
                                                        ? 1.0
                                                        : s.sweep->values.front());
  }
  validate(s.config);  // surface config problems at load time
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open scenario file: " + path);
  njson j;
  try {
    is >> j;
  } catch (const njson::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return scenario_from_json(j, path);
}

// ---------------------------------------------------------------------------
// Series comparison

struct DeviationMetrics {
  double max_abs = 0.0;   // max |bound_a - bound_b| on the shared grid
  double peak_rel = 0.0;  // max_abs / peak |bound_a| in the overlap
};

/// Interpolates the finer series onto the coarser grid over the overlapping
/// time range and reports deviations of the bound count.
inline DeviationMetrics compare(const TimeSeries& a, const TimeSeries& b) {
  if (a.times.empty() || b.times.empty()) throw NoOverlap("empty series");
  const double lo = std::max(a.times.front(), b.times.front());
  const double hi = std::min(a.times.back(), b.times.back());
  if (!(lo <= hi)) throw NoOverlap("series do not overlap in time");

  const double span_a = (a.times.back() - a.times.front()) / std::max<std::size_t>(a.size() - 1, 1);
  const double span_b = (b.times.back() - b.times.front()) / std::max<std::size_t>(b.size() - 1, 1);
  const TimeSeries& coarse = (span_a >= span_b) ? a : b;

  auto interpolate = [](const TimeSeries& s, double t) {
    auto it = std::lower_bound(s.times.begin(), s.times.end(), t);
    if (it == s.times.begin()) return s.bound.front();
    if (it == s.times.end()) return s.bound.back();
    const std::size_t i = static_cast<std::size_t>(it - s.times.begin());
    const double w = (t - s.times[i - 1]) / (s.times[i] - s.times[i - 1]);
    return s.bound[i - 1] + w * (s.bound[i] - s.bound[i - 1]);
  };

  DeviationMetrics m;
  double peak_a = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const double t = coarse.times[i];
    if (t < lo - 1e-12 || t > hi + 1e-12) continue;
    const double va = (&coarse == &a) ? coarse.bound[i] : interpolate(a, t);
    const double vb = (&coarse == &b) ? coarse.bound[i] : interpolate(b, t);
    m.max_abs = std::max(m.max_abs, std::abs(va - vb));
    peak_a = std::max(peak_a, std::abs(va));
  }
  m.peak_rel = peak_a > 0.0 ? m.max_abs / peak_a : (m.max_abs > 0.0 ? 1e300 : 0.0);
  return m;
}

// ---------------------------------------------------------------------------
// Parallel particle runs

inline std::size_t worker_count() {
  if (const char* env = std::getenv("CLEFTSIM_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Runs `n` particle simulations with seeds base_seed..base_seed+n-1 across
/// `workers` threads. Results are ordered by run index regardless of timing.
inline std::vector<PbsTrace> run_many(const ValidatedConfig& config, std::uint64_t base_seed,
                                      std::size_t n, std::size_t workers = 0) {
  if (workers == 0) workers = worker_count();
  workers = std::min(workers, n);
  std::vector<PbsTrace> traces(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          traces[i] = simulate_run(config, base_seed + i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return traces;
}

// ---------------------------------------------------------------------------
// kappa_a calibration against the particle simulator

struct CalibrationResult {
  double kappa_a_measured = 0.0;  // inverted from the stationary bound count
  double kappa_a_helper = 0.0;    // area-fraction homogenization value
  double steady_state_mean = 0.0;
  double steady_state_se = 0.0;
  std::size_t runs = 0;
};

/// Measures the unsaturated, enzyme-free stationary bound count with the
/// particle simulator and inverts the closed-form steady state for kappa_a.
inline CalibrationResult calibrate_kappa_a(const ValidatedConfig& input, std::uint64_t seed,
                                           std::size_t runs = 0, std::size_t workers = 0) {
  ModelConfig c = input.cfg;
  c.saturation_enabled = false;
  c.degradation_enabled = false;
  if (runs == 0) runs = c.disc.n_runs;
  const ValidatedConfig cfg = validate(c);

  const std::vector<PbsTrace> traces = run_many(cfg, seed, runs, workers);
  std::vector<double> run_means;
  run_means.reserve(traces.size());
  for (const PbsTrace& t : traces) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = t.bound.size() * 3 / 4; i < t.bound.size(); ++i) {
      acc += t.bound[i];
      ++n;
    }
    run_means.push_back(acc / static_cast<double>(n));
  }
  double mean = 0.0;
  for (double m : run_means) mean += m;
  mean /= static_cast<double>(run_means.size());
  double var = 0.0;
  for (double m : run_means) var += (m - mean) * (m - mean);
  const double se = run_means.size() > 1
                        ? std::sqrt(var / static_cast<double>(run_means.size() - 1) /
                                    static_cast<double>(run_means.size()))
                        : 0.0;

  double released = 0.0;
  for (const auto& ev : cfg.schedule().events) released += ev.count;

  CalibrationResult result;
  result.steady_state_mean = mean;
  result.steady_state_se = se;
  result.runs = runs;
  result.kappa_a_helper = cfg.kinetics().kappa_a;
  // Invert bound_ss = N ka / (ka + a kd).
  result.kappa_a_measured =
      cfg.geometry().a * cfg.kinetics().kappa_d * mean / (released - mean);
  return result;
}

// ---------------------------------------------------------------------------
// Scenario orchestration

struct CurveStats {
  std::string label;
  double peak = 0.0;
  double t_peak = 0.0;
  double steady_state = 0.0;  // mean over the final 10% of the horizon
};

struct CurveDeviation {
  std::string a, b;
  double max_abs = 0.0;
  double peak_rel = 0.0;
};

struct ComparisonReport {
  std::vector<CurveStats> curves;
  std::vector<CurveDeviation> deviations;
  std::vector<std::pair<std::string, double>> runtimes_s;  // excluded from report.json
};

struct RunOptions {
  std::string out_dir;  // empty: no files written
  std::vector<std::string> solver_override;
  std::uint64_t seed = 1;
  std::size_t runs_override = 0;
  std::size_t workers = 0;
  double kappa_a_override = 0.0;  // calibrated value for ssd/oracle; 0 = none
  bool write_traces = true;
};

struct CurveOutput {
  std::string label;
  std::string file_tag;
  std::string point_tag;  // sweep point this curve belongs to
  std::string solver;
  bool saturation_off = false;
  TimeSeries series;
  double runtime_s = 0.0;
};

struct ScenarioOutputs {
  std::vector<CurveOutput> curves;
  ComparisonReport report;
};

namespace scenario_detail {

inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline CurveStats stats_for(const std::string& label, const TimeSeries& series) {
  CurveStats s;
  s.label = label;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.bound[i] > s.peak) {
      s.peak = series.bound[i];
      s.t_peak = series.times[i];
    }
  }
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = series.size() * 9 / 10; i < series.size(); ++i) {
    acc += series.bound[i];
    ++n;
  }
  s.steady_state = n ? acc / static_cast<double>(n) : 0.0;
  return s;
}

}  // namespace scenario_detail

/// Executes every selected solver at every sweep point (and, when requested,
/// the saturation-off variant), writing one CSV per curve plus a JSON report
/// and an SVG plot when an output directory is given. Particle repetitions
/// run in parallel; file writes happen on the calling thread only.
inline ScenarioOutputs run_scenario(const Scenario& scenario, const RunOptions& options) {
  const std::vector<std::string>& solvers =
      options.solver_override.empty() ? scenario.solvers : options.solver_override;
  for (const auto& s : solvers) {
    if (!is_known_solver(s)) throw ValidationError("unknown solver '" + s + "'");
  }
  if (solvers.empty()) throw ValidationError("empty solver set");

  std::vector<std::pair<std::string, ModelConfig>> points;
  if (scenario.sweep) {
    for (double v : scenario.sweep->values) {
      points.emplace_back(scenario.sweep->parameter + "_" + scenario_detail::format_value(v),
                          apply_sweep_value(scenario.config, scenario.sweep->parameter, v));
    }
  } else {
    points.emplace_back("", scenario.config);
  }

  ScenarioOutputs outputs;
  const bool writing = !options.out_dir.empty();
  std::filesystem::path out(options.out_dir);
  if (writing) std::filesystem::create_directories(out);
  std::exception_ptr first_failure;

  for (const auto& [tag, point_config] : points) {
    for (int sat_pass = 0; sat_pass < (scenario.saturation_compare ? 2 : 1); ++sat_pass) {
      ModelConfig point = point_config;
      if (sat_pass == 1) point.saturation_enabled = false;
      if (options.runs_override > 0) point.disc.n_runs = options.runs_override;
      const ValidatedConfig cfg = validate(point);
      // A calibrated kappa_a replaces the homogenization estimate for the
      // deterministic solvers; the particle solver keeps its intrinsic
      // per-disk rate (it is what the calibration measured).
      ValidatedConfig cfg_calibrated = cfg;
      if (options.kappa_a_override > 0.0) {
        ModelConfig patched = cfg.cfg;
        patched.kinetics.kappa_a = options.kappa_a_override;
        cfg_calibrated = validate(patched);
      }

      for (const std::string& solver : solvers) {
        CurveOutput curve;
        curve.solver = solver;
        curve.point_tag = tag;
        curve.saturation_off = (sat_pass == 1);
        curve.file_tag = scenario.name + (tag.empty() ? "" : "_" + tag) + "_" + solver +
                         (sat_pass == 1 ? "_nosat" : "");
        curve.label = solver + (tag.empty() ? "" : " " + tag) + (sat_pass == 1 ? " (no sat)" : "");

        const auto t0 = std::chrono::steady_clock::now();
        try {
          if (solver == "ssd") {
            curve.series = ssd_run(cfg_calibrated);
          } else if (solver == "oracle") {
            const FdGrid grid{256, cfg.disc().T / 16.0};
            curve.series = fd_solve(cfg_calibrated, grid);
          } else {
            std::vector<PbsTrace> traces =
                run_many(cfg, options.seed, cfg.disc().n_runs, options.workers);
            curve.series = aggregate(traces);
            curve.series.meta.config_hash = fingerprint(cfg);
            curve.series.meta.seed = options.seed;
            if (writing && options.write_traces) {
              std::filesystem::create_directories(out / "traces");
              for (std::size_t i = 0; i < traces.size(); ++i) {
                std::ofstream os(out / "traces" /
                                 (curve.file_tag + "_run" + std::to_string(i) + ".csv"));
                write_trace_csv(traces[i], os);
              }
            }
          }
        } catch (const std::exception& e) {
          // Keep partial results; mark the failed curve and finish the rest
          // before propagating.
          if (writing) {
            std::ofstream marker(out / (curve.file_tag + ".failed"));
            marker << e.what() << "\n";
          }
          if (!first_failure) first_failure = std::current_exception();
          continue;
        }
        curve.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        if (writing) write_csv(curve.series, (out / (curve.file_tag + ".csv")).string());
        outputs.report.curves.push_back(
            scenario_detail::stats_for(curve.label, curve.series));
        outputs.report.runtimes_s.emplace_back(curve.label, curve.runtime_s);
        outputs.curves.push_back(std::move(curve));
      }
    }
  }

  // Deviations between solver pairs that ran on the same point/variant.
  for (std::size_t i = 0; i < outputs.curves.size(); ++i) {
    for (std::size_t j = i + 1; j < outputs.curves.size(); ++j) {
      const CurveOutput& a = outputs.curves[i];
      const CurveOutput& b = outputs.curves[j];
      if (a.solver == b.solver || a.saturation_off != b.saturation_off ||
          a.point_tag != b.point_tag) {
        continue;
      }
      const DeviationMetrics m = compare(a.series, b.series);
      outputs.report.deviations.push_back({a.label, b.label, m.max_abs, m.peak_rel});
    }
  }

  if (writing) {
    njson report;
    report["scenario"] = scenario.name;
    report["curves"] = njson::array();
    for (const auto& c : outputs.report.curves) {
      report["curves"].push_back({{"label", c.label},
                                  {"peak", c.peak},
                                  {"t_peak_us", c.t_peak},
                                  {"steady_state", c.steady_state}});
    }
    report["deviations"] = njson::array();
    for (const auto& d : outputs.report.deviations) {
      report["deviations"].push_back(
          {{"a", d.a}, {"b", d.b}, {"max_abs", d.max_abs}, {"peak_rel", d.peak_rel}});
    }
    std::ofstream ro(out / "report.json");
    ro << report.dump(2) << "\n";

    njson runtimes;
    for (const auto& [label, seconds] : outputs.report.runtimes_s) runtimes[label] = seconds;
    std::ofstream rt(out / "runtimes.json");
    rt << runtimes.dump(2) << "\n";

    std::vector<PlotCurve> plot;
    for (const CurveOutput& c : outputs.curves) {
      plot.push_back({c.label, c.series.times, c.series.bound, c.saturation_off});
    }
    write_svg_plot((out / (scenario.name + ".svg")).string(), scenario.name, "t [us]",
                   "bound receptors", plot);
  }
  if (first_failure) std::rethrow_exception(first_failure);
  return outputs;
}

}  // namespace cleft
