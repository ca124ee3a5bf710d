#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "cleftsim/config.hpp"
#include "cleftsim/errors.hpp"
#include "cleftsim/spectral.hpp"
#include "cleftsim/time_series.hpp"

// Discrete-time state-space engine. The channel state is the vector of
// eigenfunction expansion coefficients; receptor occupancy feeds back into
// the boundary through a rank-1 correction that lags one sampling interval.

namespace cleft {

struct SsdState {
  std::size_t k = 0;            // discrete time index, t = k*T
  std::vector<double> ybar;     // expansion coefficients
  double bound = 0.0;           // accumulated bound-receptor count
  double boundary_value = 0.0;  // net adsorption flux imposed over the last step [1/us]
  // Boundary concentration the next feedback step reads. Captured before any
  // release lands on the current instant: an impulse at x = 0 leaves c(a)
  // unchanged, but its truncated series at x = a rings (Gibbs), so reading
  // the pre-release value is both more accurate and keeps the bound count
  // nonnegative.
  double c_at_a_feedback = 0.0;
};

/// Saturation-scaled association and occupancy-scaled dissociation
/// coefficients for a given bound count. With saturation disabled the
/// association coefficient is not attenuated.
inline std::pair<double, double> saturation_coefficients(double bound, const Kinetics& kinetics,
                                                         bool saturation_enabled) {
  const double ka_hat =
      saturation_enabled ? kinetics.kappa_a * (1.0 - bound / kinetics.C_star) : kinetics.kappa_a;
  const double kd_hat = kinetics.kappa_d * bound;
  return {ka_hat, kd_hat};
}

inline double bound_count(const SsdState& state) { return state.bound; }

/// The one-step update operator for a validated config. Mode decay factors
/// and release projections are tabulated once; step() is O(Q).
class SsdOperator {
public:
  SsdOperator(const ValidatedConfig& config, const SpectralBasis& basis)
      : config_(&config), basis_(&basis) {
    const Discretization& disc = config.disc();
    const Kinetics& kin = config.kinetics();
    const std::size_t Q = basis.modes();
    T_ = disc.T;
    decay_.resize(Q);
    const double degradation_factor = std::exp(-kin.kappa_e_CE * T_);
    for (std::size_t mu = 0; mu < Q; ++mu) {
      decay_[mu] = degradation_factor * std::exp(basis.eigenvalue()[mu] * T_);
    }
    for (const auto& ev : config.schedule().events) {
      release_steps_.push_back(static_cast<std::size_t>(std::llround(ev.time_us / T_)));
      release_counts_.push_back(ev.count);
    }
    total_steps_ = static_cast<std::size_t>(std::floor(disc.t_end / T_ + 1e-9));
  }

  /// Zero state: empty channel, no receptors bound. Releases scheduled at
  /// t = 0 are injected by run() (or apply_releases()) on top of this.
  SsdState initial_state() const {
    SsdState state;
    state.ybar.assign(basis_->modes(), 0.0);
    return state;
  }

  /// Adds the spatial projection of every release scheduled at index k.
  void apply_releases(SsdState& state) const {
    for (std::size_t j = 0; j < release_steps_.size(); ++j) {
      if (release_steps_[j] == state.k) {
        const std::vector<double> f = basis_->project_release(release_counts_[j], 0.0);
        for (std::size_t mu = 0; mu < state.ybar.size(); ++mu) state.ybar[mu] += f[mu];
      }
    }
  }

  /// Advances k -> k+1. The boundary value for the step is computed from the
  /// state at k (explicit feedback), then the modes decay, the boundary
  /// projection is subtracted, and releases landing on (k+1)T are injected.
  void step(SsdState& state) const {
    const auto [ka_hat, kd_hat] =
        saturation_coefficients(state.bound, config_->kinetics(), config_->cfg.saturation_enabled);
    const double p_next = ka_hat * state.c_at_a_feedback - kd_hat;

    const std::vector<double>& parity = basis_->mode_parity();
    for (std::size_t mu = 0; mu < state.ybar.size(); ++mu) {
      state.ybar[mu] = decay_[mu] * state.ybar[mu] - T_ * parity[mu] * p_next;
    }
    state.k += 1;
    state.c_at_a_feedback = basis_->concentration_at_a(state.ybar);
    apply_releases(state);
    state.bound += T_ * p_next;
    state.boundary_value = p_next;
    if (config_->disc().clamp_bound) {
      if (state.bound < 0.0) state.bound = 0.0;
      if (state.bound > config_->kinetics().C_star) state.bound = config_->kinetics().C_star;
    }
    if (!std::isfinite(state.ybar[0]) || !std::isfinite(state.bound)) {
      throw NonFiniteState(
          "state-space update diverged: sampling interval T is too large for the binding "
          "kinetics");
    }
  }

  std::size_t total_steps() const { return total_steps_; }
  double sample_interval() const { return T_; }
  const std::vector<double>& decay_factors() const { return decay_; }

  /// Drives the recursion over the whole horizon; every output_stride-th
  /// state is recorded (the bound count accumulates at every step regardless).
  TimeSeries run() const {
    const std::size_t stride = config_->disc().output_stride;
    TimeSeries out;
    out.meta.solver = "ssd";
    out.meta.config_hash = fingerprint(*config_);

    SsdState state = initial_state();
    apply_releases(state);
    record(state, out);
    for (std::size_t k = 0; k < total_steps_; ++k) {
      step(state);
      if (state.k % stride == 0 || state.k == total_steps_) record(state, out);
    }
    return out;
  }

private:
  void record(const SsdState& state, TimeSeries& out) const {
    out.times.push_back(static_cast<double>(state.k) * T_);
    out.bound.push_back(state.bound);
    out.c_at_a.push_back(basis_->concentration_at_a(state.ybar));
    out.solute_mass.push_back(state.ybar.empty() ? 0.0 : state.ybar[0]);
  }

  const ValidatedConfig* config_;
  const SpectralBasis* basis_;
  double T_ = 0.0;
  std::vector<double> decay_;
  std::vector<std::size_t> release_steps_;
  std::vector<double> release_counts_;
  std::size_t total_steps_ = 0;
};

inline SsdState ssd_init(const ValidatedConfig& config, const SpectralBasis& basis) {
  return SsdOperator(config, basis).initial_state();
}

inline TimeSeries ssd_run(const ValidatedConfig& config) {
  const SpectralBasis basis = build_basis(config);
  return SsdOperator(config, basis).run();
}

}  // namespace cleft
