#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cleftsim/errors.hpp"

// Core model description for a synaptic cleft channel: a cuboid domain with
// release at the presynaptic face (x = 0) and reversible receptor binding at
// the postsynaptic face (x = a). All internal quantities are in um and us;
// unit conversion happens at the config I/O boundary only.

namespace cleft {

struct ChannelGeometry {
  double a = 2e-2;        // channel width in x [um]
  double width_y = 0.15;  // lateral width [um]
  double width_z = 0.15;  // lateral width [um]

  double face_area() const { return width_y * width_z; }  // postsynaptic face [um^2]
};

struct Kinetics {
  double D = 3.3e-4;          // diffusion coefficient [um^2/us]
  double kappa_a0 = 1.02e-4;  // intrinsic association coefficient per receptor disk [um/us]
  double kappa_a = 0.0;       // effective association coefficient [um/us]; <=0 means derive from kappa_a0
  double kappa_d = 8.5e-3;    // dissociation rate [1/us]
  double kappa_e_CE = 1e-3;   // enzymatic degradation time constant [1/us]
  double C_star = 203;        // total receptor count
  double r = 2.3e-3;          // receptor disk radius [um]
};

struct ReleaseEvent {
  double time_us = 0.0;  // release instant [us]
  double count = 1000;   // molecules released (N_j)
};

/// Impulsive releases at x = 0; times must be strictly increasing.
struct ReleaseSchedule {
  std::vector<ReleaseEvent> events;
};

struct Discretization {
  double T = 0.3;           // state-space sampling interval [us]
  std::size_t Q = 100;      // truncation order (number of eigenfunctions)
  double t_end = 3000.0;    // horizon [us]
  double dt_pbs = 1e-2;     // particle simulation time step [us]
  std::size_t n_runs = 50;  // particle simulation repetitions
  std::size_t output_stride = 1;  // record every n-th state-space step
  bool clamp_bound = false;       // opt-in clamp of the bound count to [0, C*]
};

struct ModelConfig {
  ChannelGeometry geometry;
  Kinetics kinetics;
  ReleaseSchedule schedule;
  Discretization disc;
  bool saturation_enabled = true;
  bool degradation_enabled = true;
};

enum class ViolationCode {
  non_positive_parameter,
  receptor_overflow,
  empty_schedule,
  bad_schedule,
};

struct Violation {
  ViolationCode code;
  std::string message;
};

/// Receptor disk area fraction of the postsynaptic face.
inline double receptor_coverage(double r, double C_star, double face_area) {
  return C_star * std::numbers::pi * r * r / face_area;
}

/// Homogenized association coefficient: kappa_a = kappa_a0 * coverage.
/// The area-fraction scaling is a default; a directly configured kappa_a
/// always wins over this helper (see validate()).
inline double effective_adsorption(double kappa_a0, double r, double C_star, double face_area) {
  const double coverage = receptor_coverage(r, C_star, face_area);
  if (coverage > 1.0) {
    std::ostringstream os;
    os << "receptor coverage " << coverage << " exceeds the postsynaptic face";
    throw PlacementInfeasible(os.str());
  }
  return kappa_a0 * coverage;
}

/// A ModelConfig that passed validate(): release times on the T-grid,
/// dt_pbs commensurate with T, disabled mechanisms zeroed, kappa_a and
/// kappa_a0 mutually resolved. Immutable by convention; safe to share
/// across workers.
struct ValidatedConfig {
  ModelConfig cfg;
  double face_area = 0.0;
  double coverage = 0.0;
  std::vector<std::string> warnings;

  const ChannelGeometry& geometry() const { return cfg.geometry; }
  const Kinetics& kinetics() const { return cfg.kinetics; }
  const ReleaseSchedule& schedule() const { return cfg.schedule; }
  const Discretization& disc() const { return cfg.disc; }
};

struct ValidationReport {
  std::optional<ValidatedConfig> config;
  std::vector<Violation> violations;
  std::vector<std::string> warnings;

  bool ok() const { return config.has_value(); }
};

namespace detail {

inline void require_positive(double v, const char* name, std::vector<Violation>& out) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    out.push_back({ViolationCode::non_positive_parameter,
                   std::string(name) + " must be positive and finite"});
  }
}

inline void require_nonnegative(double v, const char* name, std::vector<Violation>& out) {
  if (v < 0.0 || !std::isfinite(v)) {
    out.push_back({ViolationCode::non_positive_parameter,
                   std::string(name) + " must be nonnegative and finite"});
  }
}

}  // namespace detail

inline ValidationReport try_validate(const ModelConfig& input) {
  ValidationReport report;
  std::vector<Violation>& v = report.violations;
  ModelConfig c = input;

  detail::require_positive(c.geometry.a, "geometry.a", v);
  detail::require_positive(c.geometry.width_y, "geometry.width_y", v);
  detail::require_positive(c.geometry.width_z, "geometry.width_z", v);
  detail::require_positive(c.kinetics.D, "kinetics.D", v);
  detail::require_nonnegative(c.kinetics.kappa_a0, "kinetics.kappa_a0", v);
  detail::require_nonnegative(c.kinetics.kappa_d, "kinetics.kappa_d", v);
  detail::require_nonnegative(c.kinetics.kappa_e_CE, "kinetics.kappa_e_CE", v);
  detail::require_positive(c.kinetics.r, "kinetics.r", v);
  if (!(c.kinetics.C_star >= 1.0)) {
    v.push_back({ViolationCode::non_positive_parameter, "kinetics.C_star must be >= 1"});
  }
  detail::require_positive(c.disc.T, "disc.T", v);
  if (c.disc.Q < 1) {
    v.push_back({ViolationCode::non_positive_parameter, "disc.Q must be >= 1"});
  }
  detail::require_positive(c.disc.dt_pbs, "disc.dt_pbs", v);
  if (c.disc.n_runs < 1) {
    v.push_back({ViolationCode::non_positive_parameter, "disc.n_runs must be >= 1"});
  }
  if (c.disc.output_stride < 1) {
    v.push_back({ViolationCode::non_positive_parameter, "disc.output_stride must be >= 1"});
  }
  if (!(c.disc.t_end >= c.disc.T)) {
    v.push_back({ViolationCode::non_positive_parameter, "disc.t_end must be >= disc.T"});
  }

  if (c.schedule.events.empty()) {
    v.push_back({ViolationCode::empty_schedule, "release schedule is empty"});
  }
  double prev_time = -1.0;
  for (const auto& ev : c.schedule.events) {
    if (ev.time_us < 0.0 || !std::isfinite(ev.time_us)) {
      v.push_back({ViolationCode::bad_schedule, "release time must be >= 0"});
    }
    if (!(ev.count > 0.0)) {
      v.push_back({ViolationCode::bad_schedule, "release count must be > 0"});
    }
    if (ev.time_us <= prev_time) {
      v.push_back({ViolationCode::bad_schedule, "release times must be strictly increasing"});
    }
    prev_time = ev.time_us;
  }

  const double face_area = c.geometry.face_area();
  double coverage = 0.0;
  if (v.empty()) {
    coverage = receptor_coverage(c.kinetics.r, c.kinetics.C_star, face_area);
    if (coverage > 1.0) {
      std::ostringstream os;
      os << "receptor coverage " << coverage << " exceeds the postsynaptic face area";
      v.push_back({ViolationCode::receptor_overflow, os.str()});
    }
  }

  if (!v.empty()) {
    report.warnings = {};
    return report;
  }

  std::vector<std::string>& warn = report.warnings;

  // Disabled mechanisms are zeroed so every solver sees the same numbers.
  if (!c.degradation_enabled && c.kinetics.kappa_e_CE != 0.0) {
    c.kinetics.kappa_e_CE = 0.0;
    warn.push_back("degradation disabled: kappa_e_CE forced to 0");
  }

  // Resolve the kappa_a / kappa_a0 pair. A direct kappa_a wins; the missing
  // side is filled in through the area-fraction homogenization.
  if (c.kinetics.kappa_a <= 0.0) {
    c.kinetics.kappa_a =
        effective_adsorption(c.kinetics.kappa_a0, c.kinetics.r, c.kinetics.C_star, face_area);
  } else if (c.kinetics.kappa_a0 <= 0.0) {
    c.kinetics.kappa_a0 = c.kinetics.kappa_a / coverage;
  }

  // Snap release times to the sampling grid.
  for (auto& ev : c.schedule.events) {
    const double snapped = std::round(ev.time_us / c.disc.T) * c.disc.T;
    if (std::abs(snapped - ev.time_us) > 1e-9 * std::max(1.0, std::abs(ev.time_us))) {
      std::ostringstream os;
      os << "release time " << ev.time_us << " us snapped to " << snapped << " us (T-grid)";
      warn.push_back(os.str());
    }
    ev.time_us = snapped;
  }
  for (std::size_t i = 1; i < c.schedule.events.size(); ++i) {
    if (c.schedule.events[i].time_us <= c.schedule.events[i - 1].time_us) {
      v.push_back({ViolationCode::bad_schedule, "snapping collapsed two release times"});
      report.warnings = {};
      return report;
    }
  }

  // The particle step must tile the sampling interval so traces land on the
  // same grid as the state-space samples.
  {
    const double ratio = c.disc.T / c.disc.dt_pbs;
    const double n = std::max(1.0, std::round(ratio));
    const double snapped = c.disc.T / n;
    if (std::abs(snapped - c.disc.dt_pbs) > 1e-12 * c.disc.dt_pbs) {
      std::ostringstream os;
      os << "dt_pbs " << c.disc.dt_pbs << " us adjusted to " << snapped << " us (T/" << n << ")";
      warn.push_back(os.str());
    }
    c.disc.dt_pbs = snapped;
  }

  // Explicit saturation feedback stays contractive only while
  // T * kappa_a * ||feedback row||_1 stays below 1.
  {
    const double row_norm = (2.0 * static_cast<double>(c.disc.Q) - 1.0) / c.geometry.a;
    const double gain = c.disc.T * c.kinetics.kappa_a * row_norm;
    if (gain >= 1.0) {
      std::ostringstream os;
      os << "sampling interval too coarse for the binding kinetics: feedback gain " << gain
         << " >= 1; reduce T or Q";
      warn.push_back(os.str());
    }
  }

  {
    const double p_bind =
        c.kinetics.kappa_a0 * std::sqrt(std::numbers::pi * c.disc.dt_pbs / c.kinetics.D);
    if (p_bind >= 0.5) {
      std::ostringstream os;
      os << "dt_pbs too coarse: per-crossing binding probability " << p_bind
         << " >= 0.5, particle simulation results will be biased";
      warn.push_back(os.str());
    }
  }

  ValidatedConfig out;
  out.cfg = c;
  out.face_area = face_area;
  out.coverage = coverage;
  out.warnings = warn;
  report.config = std::move(out);
  return report;
}

/// Throwing wrapper around try_validate().
inline ValidatedConfig validate(const ModelConfig& input) {
  ValidationReport report = try_validate(input);
  if (!report.ok()) {
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& violation : report.violations) os << "\n  - " << violation.message;
    throw ValidationError(os.str());
  }
  return *std::move(report.config);
}

}  // namespace cleft
