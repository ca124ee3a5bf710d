#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "cleftsim/config.hpp"
#include "cleftsim/errors.hpp"
#include "cleftsim/rng.hpp"
#include "cleftsim/time_series.hpp"

// Three-dimensional particle-based reference simulator: Brownian motion in
// the cuboid cleft, mirror reflection at all walls, disk receptors on the
// postsynaptic face with per-receptor exclusivity, reversible binding, and
// first-order degradation of solute particles.

namespace cleft {

enum class ParticleStatus : std::uint8_t { solute, bound, degraded };

struct Particle {
  double x = 0.0, y = 0.0, z = 0.0;  // [um]
  std::uint32_t receptor = 0;        // valid while bound
  ParticleStatus status = ParticleStatus::solute;
};

/// Per-crossing binding probability for a partially adsorbing surface patch
/// with intrinsic rate kappa_a0, capped at 1.
inline double binding_probability(double kappa_a0, double D, double dt_pbs) {
  const double p = kappa_a0 * std::sqrt(std::numbers::pi * dt_pbs / D);
  return std::min(p, 1.0);
}

/// First-order degradation probability per particle per step: 1 - exp(-k dt).
inline double degradation_probability(double kappa_e_CE, double dt_pbs) {
  return -std::expm1(-kappa_e_CE * dt_pbs);
}

/// Receptor disks on the face x = a, laid out on a jittered grid. Each disk
/// is confined to its own grid cell, which guarantees non-overlap and makes
/// point-in-disk lookup a single cell probe.
class ReceptorArray {
public:
  ReceptorArray(const ChannelGeometry& geometry, double C_star, double r, std::uint64_t seed) {
    const double face_area = geometry.face_area();
    const double coverage = receptor_coverage(r, C_star, face_area);
    if (coverage > 0.5) {
      throw PlacementInfeasible("receptor coverage " + std::to_string(coverage) +
                                " exceeds the jittered-grid packing bound 0.5");
    }
    const std::size_t count = static_cast<std::size_t>(std::llround(C_star));
    n_ = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    cell_y_ = geometry.width_y / static_cast<double>(n_);
    cell_z_ = geometry.width_z / static_cast<double>(n_);
    if (2.0 * r > std::min(cell_y_, cell_z_)) {
      throw PlacementInfeasible("receptor disks do not fit the jittered grid cells");
    }
    radius_ = r;
    cell_receptor_.assign(n_ * n_, -1);
    center_y_.reserve(count);
    center_z_.reserve(count);

    if (count == 1) {
      center_y_.push_back(geometry.width_y / 2.0);
      center_z_.push_back(geometry.width_z / 2.0);
      cell_receptor_[0] = 0;
    } else {
      RunRng rng(seed, /*stream=*/0x9c);
      std::vector<std::uint32_t> cells(n_ * n_);
      for (std::uint32_t i = 0; i < cells.size(); ++i) cells[i] = i;
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * (cells.size() - i));
        std::swap(cells[i], cells[j]);
      }
      const double jitter_y = cell_y_ / 2.0 - r;
      const double jitter_z = cell_z_ / 2.0 - r;
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t iy = cells[i] / n_;
        const std::size_t iz = cells[i] % n_;
        const double cy =
            (iy + 0.5) * cell_y_ + jitter_y * (2.0 * rng.uniform() - 1.0);
        const double cz =
            (iz + 0.5) * cell_z_ + jitter_z * (2.0 * rng.uniform() - 1.0);
        center_y_.push_back(cy);
        center_z_.push_back(cz);
        cell_receptor_[iy * n_ + iz] = static_cast<std::int32_t>(i);
      }
    }
    occupied_.assign(center_y_.size(), 0);
  }

  std::size_t count() const { return center_y_.size(); }
  double radius() const { return radius_; }
  const std::vector<double>& center_y() const { return center_y_; }
  const std::vector<double>& center_z() const { return center_z_; }
  bool occupied(std::size_t i) const { return occupied_[i] != 0; }
  void set_occupied(std::size_t i, bool v) { occupied_[i] = v ? 1 : 0; }
  std::size_t occupied_count() const {
    std::size_t n = 0;
    for (auto o : occupied_) n += o;
    return n;
  }

  /// Index of the disk containing (y, z), or -1. Disks never leave their
  /// grid cell, so only the cell of the query point needs probing.
  std::int32_t find(double y, double z) const {
    std::size_t iy = static_cast<std::size_t>(y / cell_y_);
    std::size_t iz = static_cast<std::size_t>(z / cell_z_);
    if (iy >= n_) iy = n_ - 1;
    if (iz >= n_) iz = n_ - 1;
    const std::int32_t rec = cell_receptor_[iy * n_ + iz];
    if (rec < 0) return -1;
    const double dy = y - center_y_[rec];
    const double dz = z - center_z_[rec];
    return (dy * dy + dz * dz <= radius_ * radius_) ? rec : -1;
  }

private:
  std::size_t n_ = 0;
  double cell_y_ = 0.0, cell_z_ = 0.0, radius_ = 0.0;
  std::vector<double> center_y_, center_z_;
  std::vector<std::uint8_t> occupied_;
  std::vector<std::int32_t> cell_receptor_;
};

inline ReceptorArray place_receptors(const ChannelGeometry& geometry, double C_star, double r,
                                     std::uint64_t seed) {
  return ReceptorArray(geometry, C_star, r, seed);
}

/// Per-run stochastic record on the sampling grid t = k*T.
struct PbsTrace {
  std::vector<double> times;
  std::vector<double> bound;
  std::vector<double> solute;
  std::vector<double> degraded;
  std::uint64_t seed = 0;
  double released_total = 0.0;
};

class PbsSimulator {
public:
  PbsSimulator(const ValidatedConfig& config, std::uint64_t seed)
      : rng_(seed, /*stream=*/0),
        receptors_(config.geometry(), config.kinetics().C_star, config.kinetics().r, seed) {
    const Kinetics& kin = config.kinetics();
    const Discretization& disc = config.disc();
    a_ = config.geometry().a;
    width_y_ = config.geometry().width_y;
    width_z_ = config.geometry().width_z;
    dt_ = disc.dt_pbs;
    sigma_ = std::sqrt(2.0 * kin.D * dt_);
    p_bind_ = binding_probability(kin.kappa_a0, kin.D, dt_);
    p_unbind_ = -std::expm1(-kin.kappa_d * dt_);
    p_degrade_ = degradation_probability(kin.kappa_e_CE, dt_);
    unbind_offset_ = sigma_;
    saturation_ = config.cfg.saturation_enabled;
    for (const auto& ev : config.schedule().events) {
      release_steps_.push_back(static_cast<std::size_t>(std::llround(ev.time_us / dt_)));
      release_counts_.push_back(static_cast<std::size_t>(std::llround(ev.count)));
    }
    inject_due_releases();
  }

  /// Advances one time step: unbinding, Brownian moves with binding tests and
  /// wall reflection, degradation of surviving solute, then scheduled releases.
  void step() {
    // Unbinding happens for every bound particle before anything moves, so a
    // receptor freed this step is available to all crossing attempts.
    for (Particle& p : particles_) {
      if (p.status != ParticleStatus::bound) continue;
      if (!rng_.bernoulli(p_unbind_)) continue;
      if (saturation_) receptors_.set_occupied(p.receptor, false);
      p.status = ParticleStatus::solute;
      p.x = a_ - unbind_offset_;
      p.y = receptors_.center_y()[p.receptor];
      p.z = receptors_.center_z()[p.receptor];
      --bound_count_;
      ++solute_count_;
    }

    for (Particle& p : particles_) {
      if (p.status != ParticleStatus::solute) continue;
      double nx = p.x + sigma_ * rng_.gaussian();
      double ny = p.y + sigma_ * rng_.gaussian();
      double nz = p.z + sigma_ * rng_.gaussian();

      if (nx >= a_) {
        const double denom = nx - p.x;
        const double frac = denom > 0.0 ? (a_ - p.x) / denom : 1.0;
        double hy = fold(p.y + frac * (ny - p.y), width_y_);
        double hz = fold(p.z + frac * (nz - p.z), width_z_);
        const std::int32_t rec = receptors_.find(hy, hz);
        if (rec >= 0 && (!saturation_ || !receptors_.occupied(rec)) && rng_.bernoulli(p_bind_)) {
          p.status = ParticleStatus::bound;
          p.receptor = static_cast<std::uint32_t>(rec);
          p.x = a_;
          p.y = receptors_.center_y()[rec];
          p.z = receptors_.center_z()[rec];
          if (saturation_) receptors_.set_occupied(rec, true);
          ++bound_count_;
          --solute_count_;
          continue;
        }
        nx = 2.0 * a_ - nx;
      }
      p.x = fold(nx, a_);
      p.y = fold(ny, width_y_);
      p.z = fold(nz, width_z_);

      if (p_degrade_ > 0.0 && rng_.bernoulli(p_degrade_)) {
        p.status = ParticleStatus::degraded;
        ++degraded_count_;
        --solute_count_;
      }
    }

    ++step_index_;
    inject_due_releases();
  }

  std::size_t step_index() const { return step_index_; }
  double time() const { return static_cast<double>(step_index_) * dt_; }
  std::size_t solute_count() const { return solute_count_; }
  std::size_t bound_count() const { return bound_count_; }
  std::size_t degraded_count() const { return degraded_count_; }
  std::size_t released_total() const { return released_total_; }
  const std::vector<Particle>& particles() const { return particles_; }
  const ReceptorArray& receptors() const { return receptors_; }
  double binding_prob() const { return p_bind_; }

private:
  static double fold(double v, double width) {
    while (v < 0.0 || v > width) {
      if (v < 0.0) v = -v;
      else v = 2.0 * width - v;
    }
    return v;
  }

  void inject_due_releases() {
    for (std::size_t j = 0; j < release_steps_.size(); ++j) {
      if (release_steps_[j] != step_index_) continue;
      particles_.reserve(particles_.size() + release_counts_[j]);
      for (std::size_t i = 0; i < release_counts_[j]; ++i) {
        Particle p;
        p.x = 0.0;
        p.y = rng_.uniform() * width_y_;
        p.z = rng_.uniform() * width_z_;
        particles_.push_back(p);
      }
      solute_count_ += release_counts_[j];
      released_total_ += release_counts_[j];
    }
  }

  RunRng rng_;
  ReceptorArray receptors_;
  std::vector<Particle> particles_;
  double a_ = 0.0, width_y_ = 0.0, width_z_ = 0.0;
  double dt_ = 0.0, sigma_ = 0.0;
  double p_bind_ = 0.0, p_unbind_ = 0.0, p_degrade_ = 0.0, unbind_offset_ = 0.0;
  bool saturation_ = true;
  std::vector<std::size_t> release_steps_;
  std::vector<std::size_t> release_counts_;
  std::size_t step_index_ = 0;
  std::size_t solute_count_ = 0, bound_count_ = 0, degraded_count_ = 0, released_total_ = 0;
};

/// One stochastic run sampled on the t = k*T grid. Deterministic given
/// (config, seed); the receptor layout is drawn from the same seed.
inline PbsTrace simulate_run(const ValidatedConfig& config, std::uint64_t seed) {
  PbsSimulator sim(config, seed);
  const double T = config.disc().T;
  const std::size_t stride =
      static_cast<std::size_t>(std::llround(T / config.disc().dt_pbs));
  const std::size_t samples =
      static_cast<std::size_t>(std::floor(config.disc().t_end / T + 1e-9)) + 1;

  PbsTrace trace;
  trace.seed = seed;
  auto record = [&](std::size_t k) {
    trace.times.push_back(static_cast<double>(k) * T);
    trace.bound.push_back(static_cast<double>(sim.bound_count()));
    trace.solute.push_back(static_cast<double>(sim.solute_count()));
    trace.degraded.push_back(static_cast<double>(sim.degraded_count()));
  };
  record(0);
  for (std::size_t k = 1; k < samples; ++k) {
    for (std::size_t s = 0; s < stride; ++s) sim.step();
    record(k);
  }
  trace.released_total = static_cast<double>(sim.released_total());
  return trace;
}

/// Per-sample mean and standard error over repeated runs. All traces must
/// share one time grid.
inline TimeSeries aggregate(const std::vector<PbsTrace>& traces) {
  if (traces.empty()) throw GridMismatch("aggregate needs at least one trace");
  const std::size_t n = traces.size();
  const std::size_t len = traces[0].times.size();
  for (const PbsTrace& t : traces) {
    if (t.times.size() != len || !std::equal(t.times.begin(), t.times.end(),
                                             traces[0].times.begin())) {
      throw GridMismatch("traces sampled on different time grids");
    }
  }
  TimeSeries out;
  out.meta.solver = "pbs";
  out.meta.n_runs = n;
  out.meta.seed = traces[0].seed;
  out.times = traces[0].times;
  out.bound.resize(len);
  out.bound_se.resize(len);
  out.c_at_a.assign(len, 0.0);
  out.solute_mass.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    double mean = 0.0, solute = 0.0;
    for (const PbsTrace& t : traces) {
      mean += t.bound[i];
      solute += t.solute[i];
    }
    mean /= static_cast<double>(n);
    solute /= static_cast<double>(n);
    double var = 0.0;
    for (const PbsTrace& t : traces) {
      const double d = t.bound[i] - mean;
      var += d * d;
    }
    out.bound[i] = mean;
    out.solute_mass[i] = solute;
    out.bound_se[i] =
        (n > 1) ? std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  }
  return out;
}

inline void write_trace_csv(const PbsTrace& trace, std::ostream& os) {
  os << "# solver=pbs\n# seed=" << trace.seed << "\n";
  os << "t_us,bound,solute,degraded\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    os << detail::full_precision(trace.times[i]) << ',' << detail::full_precision(trace.bound[i])
       << ',' << detail::full_precision(trace.solute[i]) << ','
       << detail::full_precision(trace.degraded[i]) << "\n";
  }
}

}  // namespace cleft
