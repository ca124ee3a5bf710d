#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "cleftsim/config.hpp"
#include "cleftsim/errors.hpp"

// Eigenfunction machinery of the diffusion operator on [0, a] with Neumann
// boundaries: the cosine basis, its bi-orthogonal adjoint, and the boundary
// weight vectors the state-space engine feeds back through. Everything is
// closed-form; build_basis just tabulates it.

namespace cleft {

class SpectralBasis {
public:
  SpectralBasis(double a, double D, std::size_t Q) : a_(a), D_(D) {
    wavenumber_.resize(Q);
    eigenvalue_.resize(Q);
    norm_.resize(Q);
    mode_parity_.resize(Q);
    conc_weight_at_a_.resize(Q);
    for (std::size_t mu = 0; mu < Q; ++mu) {
      wavenumber_[mu] = static_cast<double>(mu) * std::numbers::pi / a;
      eigenvalue_[mu] = -D * wavenumber_[mu] * wavenumber_[mu];
      norm_[mu] = (mu == 0) ? a : a / 2.0;
      mode_parity_[mu] = (mu % 2 == 0) ? 1.0 : -1.0;  // cos(mu*pi), exact
      conc_weight_at_a_[mu] = mode_parity_[mu] / norm_[mu];
    }
  }

  std::size_t modes() const { return wavenumber_.size(); }
  double width() const { return a_; }
  double diffusion() const { return D_; }

  const std::vector<double>& wavenumber() const { return wavenumber_; }
  const std::vector<double>& eigenvalue() const { return eigenvalue_; }
  const std::vector<double>& norm() const { return norm_; }

  /// Row mapping expansion coefficients to the concentration at x = a:
  /// entries cos(mu*pi)/N_mu.
  const std::vector<double>& conc_weight_at_a() const { return conc_weight_at_a_; }

  /// Column an imposed boundary value at x = a projects onto: entries
  /// cos(mu*pi) = +-1, exact. Also the dissociation feedback vector.
  const std::vector<double>& mode_parity() const { return mode_parity_; }

  /// Basis function value [cos(g x), D g sin(g x)] (concentration and flux parts).
  std::array<double, 2> eval(std::size_t mu, double x) const {
    check_domain(x);
    const double g = wavenumber_[mu];
    return {std::cos(g * x), D_ * g * std::sin(g * x)};
  }

  /// Adjoint basis function value [-D g sin(g x), cos(g x)].
  std::array<double, 2> eval_adjoint(std::size_t mu, double x) const {
    check_domain(x);
    const double g = wavenumber_[mu];
    return {-D_ * g * std::sin(g * x), std::cos(g * x)};
  }

  /// Spatial projection of an impulsive release of `count` molecules at x0:
  /// component mu is count * cos(g_mu x0).
  std::vector<double> project_release(double count, double x0) const {
    check_domain(x0);
    std::vector<double> f(modes());
    for (std::size_t mu = 0; mu < f.size(); ++mu) {
      f[mu] = count * std::cos(wavenumber_[mu] * x0);
    }
    return f;
  }

  /// Concentration at x reconstructed from expansion coefficients:
  /// sum over modes of ybar_mu cos(g_mu x) / N_mu. Units 1/um.
  double concentration(const std::vector<double>& ybar, double x) const {
    check_domain(x);
    double c = 0.0;
    for (std::size_t mu = 0; mu < ybar.size() && mu < modes(); ++mu) {
      c += ybar[mu] * std::cos(wavenumber_[mu] * x) / norm_[mu];
    }
    return c;
  }

  /// Boundary concentration c(a) = conc_weight_at_a . ybar (exact parity path).
  double concentration_at_a(const std::vector<double>& ybar) const {
    double c = 0.0;
    for (std::size_t mu = 0; mu < ybar.size() && mu < modes(); ++mu) {
      c += conc_weight_at_a_[mu] * ybar[mu];
    }
    return c;
  }

  /// Dense adsorption feedback matrix (rank 1): entry (m, n) is
  /// parity_m * cos(n*pi)/N_n. The engine uses the factored form; this is the
  /// explicit matrix for tests and inspection. Row-major, modes() x modes().
  std::vector<double> adsorption_feedback_matrix() const {
    const std::size_t Q = modes();
    std::vector<double> m(Q * Q);
    for (std::size_t row = 0; row < Q; ++row) {
      for (std::size_t col = 0; col < Q; ++col) {
        m[row * Q + col] = mode_parity_[row] * conc_weight_at_a_[col];
      }
    }
    return m;
  }

private:
  void check_domain(double x) const {
    if (!(x >= 0.0 && x <= a_)) {
      throw OutOfDomain("x outside [0, a]");
    }
  }

  double a_;
  double D_;
  std::vector<double> wavenumber_;
  std::vector<double> eigenvalue_;
  std::vector<double> norm_;
  std::vector<double> mode_parity_;
  std::vector<double> conc_weight_at_a_;
};

inline SpectralBasis build_basis(const ChannelGeometry& geometry, double D, std::size_t Q) {
  return SpectralBasis(geometry.a, D, Q);
}

inline SpectralBasis build_basis(const ValidatedConfig& config) {
  return SpectralBasis(config.geometry().a, config.kinetics().D, config.disc().Q);
}

}  // namespace cleft
