#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <span>
#include <vector>

#include "cleftsim/config.hpp"
#include "cleftsim/errors.hpp"
#include "cleftsim/time_series.hpp"

// Independent cross-check for the state-space engine: a cell-centered
// Crank-Nicolson solver for the same boundary-value problem. Diffusion and
// degradation are handled implicitly; the nonlinear boundary keeps the same
// one-step lag as the state-space recursion, so the two solvers discretise
// one and the same closure of the continuous model.

namespace cleft {

struct FdGrid {
  std::size_t cells = 256;  // spatial cells (M >= 16)
  double dt = 0.01;         // time step [us]
};

namespace fd_detail {

// Tridiagonal solve (Thomas). diag/upper/lower are the matrix bands; rhs is
// overwritten with the solution.
inline void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                              std::vector<double>& upper, std::vector<double>& rhs,
                              std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  scratch[0] = upper[0] / diag[0];
  rhs[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = 1.0 / (diag[i] - lower[i] * scratch[i - 1]);
    scratch[i] = upper[i] * m;
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) * m;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] -= scratch[i] * rhs[i + 1];
  }
}

}  // namespace fd_detail

/// Crank-Nicolson solve of the reaction-diffusion problem, sampled onto the
/// t = k*T output grid by linear interpolation.
inline TimeSeries fd_solve(const ValidatedConfig& config, const FdGrid& grid) {
  if (grid.cells < 16) throw ValidationError("FdGrid.cells must be >= 16");
  if (!(grid.dt > 0.0)) throw ValidationError("FdGrid.dt must be positive");

  const ChannelGeometry& geom = config.geometry();
  const Kinetics& kin = config.kinetics();
  const std::size_t M = grid.cells;
  const double h = geom.a / static_cast<double>(M);
  const double dt = grid.dt;
  const double D = kin.D;
  const double lam = D * dt / (2.0 * h * h);
  const double dec = kin.kappa_e_CE * dt / 2.0;
  const bool saturation = config.cfg.saturation_enabled;

  std::vector<double> c(M, 0.0);
  std::vector<double> lower(M), diag(M), upper(M), rhs(M), scratch(M);

  // Release bookkeeping (times are on the T-grid; dt may not divide T, so
  // releases fire at the first step boundary reaching their instant).
  std::size_t next_release = 0;
  const auto& events = config.schedule().events;
  auto inject_through = [&](double t_now) {
    while (next_release < events.size() && events[next_release].time_us <= t_now + 1e-12) {
      c[0] += events[next_release].count / h;
      ++next_release;
    }
  };

  const double T = config.disc().T;
  const std::size_t samples =
      static_cast<std::size_t>(std::floor(config.disc().t_end / T + 1e-9)) + 1;

  TimeSeries out;
  out.meta.solver = "oracle";
  out.meta.config_hash = fingerprint(config);
  {
    std::ostringstream note;
    note << "M=" << M << " dt=" << dt << " diffusion_number=" << D * dt / (h * h);
    out.meta.note = note.str();
  }

  double bound = 0.0;  // accumulated bound-receptor count
  double t = 0.0;
  inject_through(0.0);

  auto face_value = [&](const std::vector<double>& field, double alpha, double beta) {
    // Boundary-face concentration from the ghost relation c_g = alpha*c_{M-1} + beta.
    return ((1.0 + alpha) * field[M - 1] + beta) / 2.0;
  };
  auto total_mass = [&](const std::vector<double>& field) {
    double m = 0.0;
    for (double v : field) m += v;
    return m * h;
  };

  std::size_t next_sample = 0;
  double prev_bound = 0.0, prev_face = 0.0, prev_mass = 0.0, prev_t = 0.0;

  // Ghost coefficients for the current step (lagged saturation state).
  auto ghost_coeffs = [&](double bound_now) {
    const double ka_hat = saturation ? kin.kappa_a * (1.0 - bound_now / kin.C_star) : kin.kappa_a;
    const double rb = h * ka_hat / (2.0 * D);
    const double alpha = (1.0 - rb) / (1.0 + rb);
    const double beta = (h * kin.kappa_d * bound_now / D) / (1.0 + rb);
    return std::pair<double, double>{alpha, beta};
  };

  {
    auto [alpha, beta] = ghost_coeffs(bound);
    prev_face = face_value(c, alpha, beta);
    prev_mass = total_mass(c);
  }

  auto record_sample = [&](double ts, double b, double cf, double mass) {
    out.times.push_back(ts);
    out.bound.push_back(b);
    out.c_at_a.push_back(cf);
    out.solute_mass.push_back(mass);
  };
  // t = 0 sample.
  record_sample(0.0, bound, prev_face, prev_mass);
  next_sample = 1;

  std::size_t steps_done = 0;
  while (next_sample < samples) {
    const auto [alpha, beta] = ghost_coeffs(bound);
    const double ka_hat = saturation ? kin.kappa_a * (1.0 - bound / kin.C_star) : kin.kappa_a;
    const double face_old = face_value(c, alpha, beta);

    // Assemble CN system with the ghost cells eliminated at both levels.
    for (std::size_t m = 0; m < M; ++m) {
      lower[m] = -lam;
      upper[m] = -lam;
      diag[m] = 1.0 + 2.0 * lam + dec;
    }
    diag[0] = 1.0 + lam + dec;  // mirror ghost at x = 0
    diag[M - 1] = 1.0 + lam * (2.0 - alpha) + dec;

    rhs[0] = c[0] * (1.0 - lam - dec) + lam * c[1];
    for (std::size_t m = 1; m + 1 < M; ++m) {
      rhs[m] = c[m] * (1.0 - 2.0 * lam - dec) + lam * (c[m - 1] + c[m + 1]);
    }
    rhs[M - 1] = c[M - 1] * (1.0 - lam * (2.0 - alpha) - dec) + lam * c[M - 2] + 2.0 * lam * beta;

    fd_detail::solve_tridiagonal(lower, diag, upper, rhs, scratch);
    c.swap(rhs);

    const double face_new = face_value(c, alpha, beta);
    // Trapezoidal flux with the lagged boundary coefficients; this is exactly
    // the flux the conservative update removed from the field.
    const double flux = ka_hat * (face_old + face_new) / 2.0 - kin.kappa_d * bound;
    bound += dt * flux;
    ++steps_done;
    t = static_cast<double>(steps_done) * dt;  // no accumulation drift

    const double mass_pre = total_mass(c);
    if (std::abs(c[0]) > 1e12 || std::abs(bound) > 1e12 || !std::isfinite(bound) ||
        !std::isfinite(c[0])) {
      throw Divergence("finite-difference solve diverged (check dt against the kinetics)");
    }

    // Samples strictly inside the step see the pre-release field.
    while (next_sample < samples) {
      const double ts = static_cast<double>(next_sample) * T;
      if (ts >= t - 1e-12) break;
      const double w = (ts - prev_t) / dt;
      record_sample(ts, prev_bound + w * (bound - prev_bound),
                    prev_face + w * (face_new - prev_face),
                    prev_mass + w * (mass_pre - prev_mass));
      ++next_sample;
    }
    // Releases landing on this step boundary enter before a sample taken
    // exactly there, matching the state-space convention.
    inject_through(t);
    const double mass = total_mass(c);
    if (next_sample < samples &&
        std::abs(static_cast<double>(next_sample) * T - t) <= 1e-12 * std::max(1.0, t)) {
      record_sample(static_cast<double>(next_sample) * T, bound, face_new, mass);
      ++next_sample;
    }
    prev_bound = bound;
    prev_face = face_new;
    prev_mass = mass;
    prev_t = t;
  }
  return out;
}

struct ConvergenceLevel {
  FdGrid grid;
  double max_diff_from_previous = 0.0;  // max-abs difference of the bound count
};

struct ConvergenceReport {
  std::vector<ConvergenceLevel> levels;
  TimeSeries finest;
};

/// Runs the solver on a refinement ladder and checks that successive levels
/// approach each other monotonically; the finest level is the reference.
inline ConvergenceReport convergence_study(const ValidatedConfig& config,
                                           std::span<const FdGrid> ladder) {
  if (ladder.size() < 3) throw ValidationError("convergence ladder needs >= 3 levels");
  ConvergenceReport report;
  TimeSeries prev;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    TimeSeries cur = fd_solve(config, ladder[i]);
    ConvergenceLevel level;
    level.grid = ladder[i];
    if (i > 0) {
      double max_diff = 0.0;
      for (std::size_t k = 0; k < cur.bound.size(); ++k) {
        max_diff = std::max(max_diff, std::abs(cur.bound[k] - prev.bound[k]));
      }
      level.max_diff_from_previous = max_diff;
      if (i > 1) {
        const double before = report.levels.back().max_diff_from_previous;
        if (max_diff > before) {
          std::ostringstream os;
          os << "refinement did not reduce the solution change: " << before << " -> " << max_diff;
          throw NonMonotoneConvergence(os.str());
        }
      }
      report.levels.push_back(level);
    } else {
      report.levels.push_back(level);
    }
    prev = std::move(cur);
  }
  report.finest = std::move(prev);
  return report;
}

}  // namespace cleft
