#pragma once

#include "hcl/grid.hpp"
#include "hcl/kernel.hpp"

#include <functional>

namespace hcl {

/// One dispersion band at a grid point: omega >= 0, its multiplicity, the
/// spectral projection, and sign(d omega / d theta_1) in {-1, 0, +1}.
struct Band {
  double omega = 0.0;
  int multiplicity = 0;
  MatC projection;
  int sign1 = 0;
};

struct SpectralEntry {
  MatC vhat;    // n x n Hermitian symbol
  MatC omega;   // Hermitian PSD square root of vhat
  std::vector<Band> bands;  // distinct eigenvalues of omega, ascending
};

/// Numerical tolerances of the spectral construction.
struct SpectralParams {
  double band_merge_rel = 1e-8;   // eps_merge = rel * (1 + max omega)
  double acoustic_eps = 1e-9;     // omega below this counts as acoustic
  double e3_clamp = 1e-12;        // eigenvalues of vhat >= -clamp, clipped to 0
};

/// Per-grid-point spectral data of a kernel: symbol, square root, bands.
/// Immutable after construction; safe to share across threads.
struct SpectralTable {
  InteractionKernel kernel;
  TorusGrid grid;
  SpectralParams params;
  std::vector<SpectralEntry> entries;  // grid.size() entries, flat order

  const SpectralEntry& at(long flat) const { return entries[flat]; }
  int n() const { return kernel.n; }

  /// Largest band value over the grid.
  double max_omega() const;
  /// max over bands and grid points of |grad omega| (finite differences);
  /// the group-velocity constant of the horizon guard.
  double group_velocity() const;
};

/// Eigendecomposition of Vhat over the grid. Throws on an E3 violation
/// (eigenvalue < -e3_clamp) with the witness theta in the message.
/// sign(d_theta1 omega) is analytic (sign sin theta_1) for NN kernels and a
/// central finite difference on the grid otherwise; values below acoustic_eps
/// in magnitude give sign 0.
SpectralTable build_spectral_table(const InteractionKernel& kernel,
                                   const TorusGrid& grid,
                                   const SpectralParams& params = {},
                                   int workers = 0);

/// f(Omega) = sum_sigma f(omega_sigma) Pi_sigma at one grid point.
MatC matrix_function(const SpectralEntry& entry,
                     const std::function<double(double)>& f);

/// sin(Omega t) Omega^{-1} evaluated as t sinc(omega t): finite at acoustic
/// points, where the limit is t.
MatC sin_omega_t_over_omega(const SpectralEntry& entry, double t);

/// f(Omega) for f requiring omega > 0 (e.g. 1/omega); throws if any band
/// sits below acoustic_eps.
MatC matrix_function_positive(const SpectralEntry& entry,
                              const std::function<double(double)>& f,
                              double acoustic_eps);

}  // namespace hcl
