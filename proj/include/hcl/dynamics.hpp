#pragma once

#include "hcl/field.hpp"
#include "hcl/spectral.hpp"

namespace hcl {

/// Fourier multiplier of the exact flow at time t, stored blockwise:
///   Ghat_t(theta) = [ cos(Omega t)          sin(Omega t) Omega^{-1} ]
///                   [ -Omega sin(Omega t)   cos(Omega t)            ]
/// with the sinc regularization of the upper-right block at acoustic points.
struct PropagatorSymbol {
  double t = 0.0;
  int n = 1;
  std::vector<MatC> cos_block;   // cos(Omega t)
  std::vector<MatC> sinc_block;  // sin(Omega t) Omega^{-1}
  std::vector<MatC> osin_block;  // -Omega sin(Omega t)

  /// Assembled 2n x 2n matrix at one grid point.
  MatC full(long flat) const;
};

PropagatorSymbol propagator_hat(const SpectralTable& table, double t,
                                int workers = 0);

/// Position-space Green function G_t(z) on a periodic box whose extents
/// match the table grid (inverse DFT of the propagator symbol, real part
/// after an imaginary-residue check).
struct GreenFunction {
  Box box;
  int n = 1;
  double t = 0.0;
  std::vector<Mat> g;  // box.sites() matrices of size 2n x 2n

  /// G_t at a (wrapped) lattice displacement.
  const Mat& at(std::span<const int> dz) const {
    return g[box.shape.flat_wrapped(dz)];
  }
};

GreenFunction green_function(const SpectralTable& table, double t,
                             int workers = 0);

/// Exact full-space evolution: Xhat(theta, t) = Ghat_t(theta) Xhat_0(theta).
FieldState evolve_full(const FieldState& x0, const SpectralTable& table,
                       double t, int workers = 0);

enum class HalfMethod { kOddExtension, kImage };

/// Odd extension of a half field onto the doubled periodic box
/// (X(z) = -X(~z), X restricted to z1 >= 0 equals Y).
FieldState odd_extension(const FieldState& y);
/// Restriction of a doubled-box field to the half slab z1 in 0..L1-1.
FieldState restrict_half(const FieldState& x);

/// Half-space Dirichlet evolution. The table must live on the doubled grid
/// of y0's box. Both methods agree to 1e-10 within the horizon; the image
/// method sums G_t(z - z') - G_t(z - ~z') directly and is O(sites^2).
FieldState evolve_half(const FieldState& y0, const SpectralTable& table,
                       double t, HalfMethod method = HalfMethod::kOddExtension,
                       int workers = 0);

/// Half-space evolution against a prebuilt propagator symbol on the doubled
/// grid; use when evolving many states at one t.
FieldState evolve_half_prepared(const PropagatorSymbol& p,
                                const FieldState& y0);

/// Adjoint evolution Phi(., t) = U'_+(t) Psi_*: odd-extends Psi, applies the
/// adjoint symbol Ghat_t(theta)^*, returns the field on the doubled box.
/// Satisfies <U_+(t) Y0, Psi>_+ = <Y0, Phi(., t)>_+.
FieldState adjoint_evolve(const FieldState& psi, const SpectralTable& table,
                          double t, int workers = 0);

/// Conserved quadratic form (1/2) sum_z (|v|^2 + (V * u)(z) . u(z)) with
/// periodic wrap.
double energy(const FieldState& x, const InteractionKernel& kernel);

/// || Y ||_{alpha,+} = sqrt( sum_{z} |Y(z)|^2 (1 + |z|^2)^alpha ) over the
/// half box; bar z coordinates use the signed box representative.
double weighted_norm(const FieldState& y, double alpha);

/// Velocity-Verlet integration of  u'' = -V * u  as an independent check on
/// the spectral propagator. Throws if dt violates the stability bound
/// dt * omega_max < 0.5 (omega_max bounded by sqrt(sum_z ||V(z)||)).
FieldState timestep_oracle(const FieldState& x0,
                           const InteractionKernel& kernel, double t,
                           double dt);

}  // namespace hcl
