#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cleftsim/config.hpp"
#include "cleftsim/errors.hpp"

namespace cleft {

struct SeriesMeta {
  std::string solver;            // "ssd" | "pbs" | "oracle"
  std::uint64_t config_hash = 0;
  std::size_t n_runs = 1;
  std::uint64_t seed = 0;
  std::string note;
};

/// Sampled outputs of one solver run on the sampling grid t = k*T.
struct TimeSeries {
  std::vector<double> times;        // [us]
  std::vector<double> bound;        // accumulated bound-receptor count
  std::vector<double> c_at_a;       // boundary concentration [1/um]
  std::vector<double> solute_mass;  // integral of c over the channel
  std::vector<double> bound_se;     // per-sample standard error; empty if deterministic
  SeriesMeta meta;

  std::size_t size() const { return times.size(); }
};

namespace detail {

inline std::string full_precision(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// FNV-1a fingerprint of the normalized config, recorded in series metadata
/// so curves can be traced back to the exact inputs that produced them.
inline std::uint64_t fingerprint(const ValidatedConfig& config) {
  std::ostringstream os;
  const ModelConfig& c = config.cfg;
  os << detail::full_precision(c.geometry.a) << '|' << detail::full_precision(c.geometry.width_y)
     << '|' << detail::full_precision(c.geometry.width_z) << '|'
     << detail::full_precision(c.kinetics.D) << '|' << detail::full_precision(c.kinetics.kappa_a0)
     << '|' << detail::full_precision(c.kinetics.kappa_a) << '|'
     << detail::full_precision(c.kinetics.kappa_d) << '|'
     << detail::full_precision(c.kinetics.kappa_e_CE) << '|'
     << detail::full_precision(c.kinetics.C_star) << '|' << detail::full_precision(c.kinetics.r)
     << '|' << detail::full_precision(c.disc.T) << '|' << c.disc.Q << '|'
     << detail::full_precision(c.disc.t_end) << '|' << detail::full_precision(c.disc.dt_pbs) << '|'
     << c.disc.n_runs << '|' << c.disc.output_stride << '|' << c.saturation_enabled << '|'
     << c.degradation_enabled;
  for (const auto& ev : c.schedule.events) {
    os << '|' << detail::full_precision(ev.time_us) << ':' << detail::full_precision(ev.count);
  }
  const std::string s = os.str();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline void write_csv(const TimeSeries& series, std::ostream& os) {
  os << "# solver=" << series.meta.solver << "\n";
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(series.meta.config_hash));
  os << "# config=" << hash << "\n";
  os << "# n_runs=" << series.meta.n_runs << "\n";
  os << "# seed=" << series.meta.seed << "\n";
  if (!series.meta.note.empty()) os << "# note=" << series.meta.note << "\n";
  const bool aggregate = !series.bound_se.empty();
  if (aggregate) {
    os << "t_us,bound_mean,bound_se\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      os << detail::full_precision(series.times[i]) << ','
         << detail::full_precision(series.bound[i]) << ','
         << detail::full_precision(series.bound_se[i]) << "\n";
    }
  } else {
    os << "t_us,bound,c_at_a,solute_mass\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
      os << detail::full_precision(series.times[i]) << ','
         << detail::full_precision(series.bound[i]) << ','
         << detail::full_precision(series.c_at_a[i]) << ','
         << detail::full_precision(series.solute_mass[i]) << "\n";
    }
  }
}

inline void write_csv(const TimeSeries& series, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  write_csv(series, os);
}

/// Reads either series schema (plain or aggregate). Column presence is
/// determined from the header row; metadata comes from leading '#' lines.
inline TimeSeries read_csv(std::istream& is, const std::string& origin = "<stream>") {
  TimeSeries series;
  std::string line;
  std::vector<std::string> columns;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        std::string value = line.substr(eq + 1);
        key.erase(0, key.find_first_not_of(' '));
        key.erase(key.find_last_not_of(' ') + 1);
        if (key == "solver") series.meta.solver = value;
        else if (key == "n_runs") series.meta.n_runs = std::strtoull(value.c_str(), nullptr, 10);
        else if (key == "seed") series.meta.seed = std::strtoull(value.c_str(), nullptr, 10);
        else if (key == "config") series.meta.config_hash = std::strtoull(value.c_str(), nullptr, 16);
        else if (key == "note") series.meta.note = value;
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (columns.empty()) {
      columns = fields;
      continue;
    }
    if (fields.size() != columns.size()) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(columns.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(fields[i].c_str(), &end);
      if (end == fields[i].c_str()) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": bad number '" + fields[i] +
                         "'");
      }
      const std::string& name = columns[i];
      if (name == "t_us") series.times.push_back(v);
      else if (name == "bound" || name == "bound_mean") series.bound.push_back(v);
      else if (name == "c_at_a") series.c_at_a.push_back(v);
      else if (name == "solute_mass") series.solute_mass.push_back(v);
      else if (name == "bound_se") series.bound_se.push_back(v);
    }
  }
  if (columns.empty()) throw ParseError(origin + ": no header row");
  if (series.times.empty()) throw ParseError(origin + ": no samples");
  return series;
}

inline TimeSeries read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open: " + path);
  return read_csv(is, path);
}

}  // namespace cleft
