#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cleftsim/scenario.hpp"
#include "test_support.hpp"

using namespace cleft;
namespace fs = std::filesystem;

namespace {

const char* kScenarioDir = CLEFTSIM_SCENARIO_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

njson tiny_scenario_json() {
  njson j;
  j["name"] = "tiny";
  ModelConfig c = cleft::testing::baseline_config();
  c.kinetics.C_star = 16;
  c.schedule.events = {{0.0, 200.0}};
  c.disc.Q = 32;
  c.disc.t_end = 60.0;
  c.disc.n_runs = 2;
  j["config"] = config_to_json(c);
  j["solvers"] = njson::array({"ssd"});
  return j;
}

}  // namespace

TEST_CASE("bundled fig3 scenario parses to the paper defaults") {
  const Scenario s = load_scenario(fs::path(kScenarioDir) / "fig3_single_release.json");
  CHECK(s.name == "fig3_single_release");
  CHECK(s.config.kinetics.kappa_a0 == 1.02e-4);
  CHECK(s.config.kinetics.kappa_d == 8.5e-3);
  CHECK(s.config.kinetics.kappa_e_CE == 1e-3);
  CHECK(s.config.kinetics.C_star == 203);
  CHECK(s.config.disc.T == 0.3);
  CHECK(s.config.disc.Q == 100);
  CHECK(s.config.disc.t_end == 3000.0);  // "3ms" normalized to us
  CHECK(s.config.schedule.events.size() == 1);
  REQUIRE(s.sweep.has_value());
  CHECK(s.sweep->parameter == "C_star");
  CHECK(s.sweep->values == std::vector<double>{102, 203, 406});
  CHECK(s.saturation_compare);
  CHECK(s.solvers.size() == 3);
}

TEST_CASE("empty or malformed files raise ParseError") {
  const fs::path dir = fs::temp_directory_path() / "cleftsim_scn";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "empty.json") << "";
  }
  CHECK_THROWS_AS(load_scenario((dir / "empty.json").string()), ParseError);
  {
    std::ofstream(dir / "noconf.json") << "{\"name\": \"x\"}";
  }
  CHECK_THROWS_AS(load_scenario((dir / "noconf.json").string()), ParseError);
  CHECK_THROWS_AS(load_scenario((dir / "missing.json").string()), ParseError);
}

TEST_CASE("time unit suffixes normalize to microseconds") {
  njson j = tiny_scenario_json();
  j["config"]["schedule"] = njson::array({njson{{"t", "1ms"}, {"N", 100}}});
  j["config"]["discretization"]["t_end"] = "1.5ms";
  j["config"]["discretization"]["T"] = "0.3us";
  const Scenario s = scenario_from_json(j, "<mem>");
  CHECK(s.config.schedule.events[0].time_us == 1000.0);
  CHECK(s.config.disc.t_end == 1500.0);
  CHECK(s.config.disc.T == 0.3);
  CHECK_THROWS_AS(parse_time_us(njson("3 fortnights"), "t"), ParseError);
}

TEST_CASE("scenario-level validation failures") {
  njson j = tiny_scenario_json();
  SUBCASE("unknown solver") {
    j["solvers"] = njson::array({"fdtd"});
    CHECK_THROWS_AS(scenario_from_json(j, "<mem>"), ValidationError);
  }
  SUBCASE("empty solver set") {
    j["solvers"] = njson::array();
    CHECK_THROWS_AS(scenario_from_json(j, "<mem>"), ValidationError);
  }
  SUBCASE("unknown sweep parameter") {
    j["sweep"] = {{"parameter", "phlogiston"}, {"values", {1.0}}};
    CHECK_THROWS_AS(scenario_from_json(j, "<mem>"), ValidationError);
  }
  SUBCASE("non-positive sweep value") {
    j["sweep"] = {{"parameter", "N"}, {"values", {1000.0, -3.0}}};
    CHECK_THROWS_AS(scenario_from_json(j, "<mem>"), ValidationError);
  }
  SUBCASE("invalid config inside the scenario") {
    j["config"]["geometry"]["a"] = 0.0;
    CHECK_THROWS_AS(scenario_from_json(j, "<mem>"), ValidationError);
  }
}

TEST_CASE("compare: identical series have zero deviation") {
  const ValidatedConfig cfg = validate([] {
    ModelConfig c = cleft::testing::baseline_config();
    c.disc.t_end = 150.0;
    return c;
  }());
  const TimeSeries s = ssd_run(cfg);
  const DeviationMetrics m = compare(s, s);
  CHECK(m.max_abs == 0.0);
  CHECK(m.peak_rel == 0.0);
}

TEST_CASE("compare: interpolation onto the coarser grid") {
  ModelConfig c = cleft::testing::baseline_config();
  c.disc.t_end = 300.0;
  const TimeSeries fine = ssd_run(validate(c));
  // Subsampled copy: every coarse instant exists in the fine series, so the
  // interpolation must reproduce it exactly.
  TimeSeries coarse;
  coarse.meta = fine.meta;
  for (std::size_t i = 0; i < fine.size(); i += 4) {
    coarse.times.push_back(fine.times[i]);
    coarse.bound.push_back(fine.bound[i]);
    coarse.c_at_a.push_back(fine.c_at_a[i]);
    coarse.solute_mass.push_back(fine.solute_mass[i]);
  }
  const DeviationMetrics exact = compare(coarse, fine);
  CHECK(exact.max_abs == 0.0);

  // Different sampling of (nearly) the same dynamics: only the O(T) feedback
  // lag separates the curves.
  c.disc.T = 0.15;
  const TimeSeries finer = ssd_run(validate(c));
  const DeviationMetrics m = compare(fine, finer);
  CHECK(m.max_abs < 1.0);
  CHECK(m.peak_rel < 0.02);
}

TEST_CASE("compare: disjoint time ranges raise NoOverlap") {
  TimeSeries a, b;
  a.times = {0.0, 1.0, 2.0};
  a.bound = {0.0, 1.0, 2.0};
  b.times = {5.0, 6.0};
  b.bound = {1.0, 1.0};
  CHECK_THROWS_AS(compare(a, b), NoOverlap);
}

TEST_CASE("csv round trip preserves samples and metadata") {
  ModelConfig c = cleft::testing::baseline_config();
  c.disc.t_end = 30.0;
  const TimeSeries s = ssd_run(validate(c));
  std::stringstream ss;
  write_csv(s, ss);
  const TimeSeries back = read_csv(ss, "<mem>");
  CHECK(back.meta.solver == "ssd");
  CHECK(back.meta.config_hash == s.meta.config_hash);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back.times[i] == s.times[i]);  // full-precision round trip
    CHECK(back.bound[i] == s.bound[i]);
    CHECK(back.c_at_a[i] == s.c_at_a[i]);
    CHECK(back.solute_mass[i] == s.solute_mass[i]);
  }
}

TEST_CASE("run_scenario writes curves, report, and plot; reruns are byte-identical") {
  njson j = tiny_scenario_json();
  j["solvers"] = njson::array({"ssd", "pbs"});
  const Scenario scenario = scenario_from_json(j, "<mem>");

  const fs::path out1 = fs::temp_directory_path() / "cleftsim_out1";
  const fs::path out2 = fs::temp_directory_path() / "cleftsim_out2";
  fs::remove_all(out1);
  fs::remove_all(out2);

  RunOptions options;
  options.seed = 7;
  options.out_dir = out1.string();
  const ScenarioOutputs first = run_scenario(scenario, options);
  options.out_dir = out2.string();
  const ScenarioOutputs second = run_scenario(scenario, options);

  CHECK(fs::exists(out1 / "tiny_ssd.csv"));
  CHECK(fs::exists(out1 / "tiny_pbs.csv"));
  CHECK(fs::exists(out1 / "report.json"));
  CHECK(fs::exists(out1 / "runtimes.json"));
  CHECK(fs::exists(out1 / "tiny.svg"));
  CHECK(fs::exists(out1 / "traces" / "tiny_pbs_run0.csv"));

  for (const char* name : {"tiny_ssd.csv", "tiny_pbs.csv", "report.json"}) {
    CHECK(slurp(out1 / name) == slurp(out2 / name));
  }
  CHECK(first.curves.size() == 2);
  CHECK(first.report.deviations.size() == 1);
  CHECK(second.report.curves.size() == first.report.curves.size());
}

TEST_CASE("sweep outputs do not depend on sweep order") {
  njson j = tiny_scenario_json();
  j["sweep"] = {{"parameter", "N"}, {"values", {100.0, 300.0}}};
  const fs::path out1 = fs::temp_directory_path() / "cleftsim_sw1";
  const fs::path out2 = fs::temp_directory_path() / "cleftsim_sw2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  RunOptions options;
  options.out_dir = out1.string();
  run_scenario(scenario_from_json(j, "<mem>"), options);
  j["sweep"]["values"] = {300.0, 100.0};
  options.out_dir = out2.string();
  run_scenario(scenario_from_json(j, "<mem>"), options);
  for (const char* name : {"tiny_N_100_ssd.csv", "tiny_N_300_ssd.csv"}) {
    CHECK(slurp(out1 / name) == slurp(out2 / name));
  }
}

TEST_CASE("fig2 scenario: saturated steady states sit below the closed-form value") {
  const Scenario scenario = load_scenario(fs::path(kScenarioDir) / "fig2_steady_state.json");
  RunOptions options;
  options.solver_override = {"ssd"};  // particle curves are exercised at acceptance scale
  const ScenarioOutputs outputs = run_scenario(scenario, options);

  const double ka = 1.5293934866527471e-05;
  const double formula = 1000.0 * ka / (ka + 0.02 * 8.5e-3);
  REQUIRE(outputs.curves.size() == 2 * scenario.sweep->values.size());
  for (std::size_t i = 0; i < outputs.curves.size(); i += 2) {
    const CurveStats& sat = outputs.report.curves[i];
    const CurveStats& unsat = outputs.report.curves[i + 1];
    CHECK(outputs.curves[i].saturation_off == false);
    CHECK(outputs.curves[i + 1].saturation_off == true);
    CHECK(sat.steady_state < formula);
    CHECK(sat.steady_state < unsat.steady_state);
    CHECK(unsat.steady_state == doctest::Approx(formula).epsilon(1e-4));
  }
}

TEST_CASE("failed curves leave markers and partial results persist") {
  njson j = tiny_scenario_json();
  j["config"]["kinetics"]["kappa_a"] = 1.5e-5;
  j["config"]["discretization"]["T"] = 5000.0;
  j["config"]["discretization"]["t_end"] = 50000.0;
  j["solvers"] = njson::array({"ssd"});
  const Scenario scenario = scenario_from_json(j, "<mem>");
  const fs::path out = fs::temp_directory_path() / "cleftsim_fail";
  fs::remove_all(out);
  RunOptions options;
  options.out_dir = out.string();
  CHECK_THROWS_AS(run_scenario(scenario, options), SolverError);
  CHECK(fs::exists(out / "tiny_ssd.failed"));
  CHECK(fs::exists(out / "report.json"));
}

TEST_CASE("calibration inverts the steady state at reduced scale") {
  ModelConfig c = cleft::testing::baseline_config();
  c.schedule.events = {{0.0, 300.0}};
  c.disc.t_end = 600.0;
  c.disc.n_runs = 4;
  const CalibrationResult result = calibrate_kappa_a(validate(c), 17);
  CHECK(result.runs == 4);
  CHECK(result.kappa_a_helper == doctest::Approx(1.5293934866527471e-05).epsilon(1e-12));
  CHECK(result.kappa_a_measured > 0.0);
  // Functional sanity only; the statistical acceptance bound lives in the
  // acceptance suite at full scale.
  CHECK(result.kappa_a_measured == doctest::Approx(result.kappa_a_helper).epsilon(0.5));
  CHECK(result.steady_state_se > 0.0);
}

TEST_CASE("worker count honors the environment override") {
  setenv("CLEFTSIM_WORKERS", "3", 1);
  CHECK(worker_count() == 3);
  unsetenv("CLEFTSIM_WORKERS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("run_many is deterministic and ordered by run index") {
  ModelConfig c = cleft::testing::baseline_config();
  c.disc.t_end = 30.0;
  const ValidatedConfig cfg = validate(c);
  const std::vector<PbsTrace> par = run_many(cfg, 3, 4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    const PbsTrace solo = simulate_run(cfg, 3 + i);
    CHECK(par[i].bound == solo.bound);
    CHECK(par[i].solute == solo.solute);
  }
}
