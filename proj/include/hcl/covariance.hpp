#pragma once

#include "hcl/dynamics.hpp"
#include "hcl/random_fields.hpp"

namespace hcl {

/// C(theta) = [[0, Omega^{-1}], [-Omega, 0]]. Throws at acoustic points
/// (some omega_sigma < eps0); quadrature grids use the half-cell offset so
/// this never triggers for the kernels under study.
MatC c_matrix(const SpectralEntry& entry, double eps0 = 1e-9);

/// Equilibrium covariance: Fourier symbols
///   qhat_inf^+ = (1/4) sum_s Pi_s (qhat_0 + C qhat_0 C^*) Pi_s
///   qhat_inf^- = (i/4) sum_s sign(d_theta1 omega_s) Pi_s (C qhat_0 - qhat_0 C^*) Pi_s
/// with Pi_s acting as diag(Pi_s, Pi_s) on the (position, velocity) blocks,
/// plus their position-space tables over the grid box.
struct LimitCovariance {
  TorusGrid grid;  // offset grid of the generating table
  int n = 1;
  std::vector<MatC> qhat_plus;   // 2n x 2n per grid point
  std::vector<MatC> qhat_minus;  // 2n x 2n per grid point
  std::vector<Mat> qpos;         // q_inf(z) = (q^+ + q^-)(z), signed z storage
  std::vector<Mat> qpos_plus;    // q_inf^+(z)

  /// q_inf at a signed lattice displacement (|z_a| <= N_a/2 - 1).
  const Mat& q_inf(std::span<const int> z) const {
    return qpos[grid.shape.flat_wrapped(z)];
  }
  const Mat& q_inf_plus(std::span<const int> z) const {
    return qpos_plus[grid.shape.flat_wrapped(z)];
  }

  /// Four-term image combination Q_inf(z, z') per the half-space limit law.
  Mat halfspace(std::span<const int> z, std::span<const int> zp) const;
};

LimitCovariance limit_symbol(const CovarianceSpec& spec,
                             const SpectralTable& table, int workers = 0);

enum class Provenance { kEmpirical, kPropagatedExact, kLimit };

/// Covariance blocks over a probe set. Index layout matches
/// EnsembleAccumulator: block i (u=0, v=1), probe p, component k
/// -> i*n*P + p*n + k.
struct CovarianceField {
  std::vector<LatticePoint> probes;
  int n = 1;
  Provenance provenance = Provenance::kPropagatedExact;
  long sample_count = 0;
  Mat values;    // D x D
  Mat stderrs;   // D x D, empirical only (otherwise empty)

  long dim() const { return 2L * n * static_cast<long>(probes.size()); }
  /// Q^{ij}(z_p, z_q) as an n x n block.
  Mat block(int i, long p, int j, long q) const {
    long P = static_cast<long>(probes.size());
    return values.block(i * n * P + p * n, j * n * P + q * n, n, n);
  }
  /// Full 2n x 2n matrix Q(z_p, z_q).
  Mat pair_matrix(long p, long q) const;

  std::string to_csv() const;
};

/// Raw second-moment estimates with per-entry standard errors. Needs at
/// least two samples.
CovarianceField empirical_covariance(const EnsembleAccumulator& acc);

/// Initial covariance as an operator on half fields over a doubled periodic
/// box: either a translation-invariant spec under the half-space cutoff,
///   Q0(y, y') = q0(y - y') zeta(y1) zeta(y'_1),
/// or the limit covariance in its image form,
///   Q(y, y') = q(y-y') - q(y-~y') - q(~y-y') + q(~y-~y').
struct CovarianceOperator {
  Box doubled_box;
  int n = 1;
  bool image_structure = false;
  int cutoff_a = 0;
  std::vector<MatC> qhat;  // 2n x 2n multiplier on the doubled DFT grid

  /// B = Q0[A] for a half field A; result is again a half field.
  FieldState apply(const FieldState& a) const;
};

CovarianceOperator make_cutoff_operator(const CovarianceSpec& spec,
                                        int cutoff_a, const Box& half_box);
CovarianceOperator make_limit_operator(const LimitCovariance& limit,
                                       const Box& half_box);

/// Exact covariance propagation Q_t = G_{t,+} Q_0 G_{t,+}^T, evaluated on
/// probe pairs. Deterministic: for Gaussian initial data this is the full
/// law of the evolved measure. Dense work is bounded by the doubled box
/// size (throws above 2^20 sites).
CovarianceField propagate_covariance(const CovarianceOperator& q0,
                                     const SpectralTable& table_doubled,
                                     double t,
                                     const std::vector<LatticePoint>& probes,
                                     int workers = 0);

/// Diagonal of the propagated covariance over the whole half box:
/// per site, the 2n x 2n matrix Q_t(z, z). Used for the uniform bound and
/// weighted-norm studies.
std::vector<Mat> propagate_covariance_diagonal(
    const CovarianceOperator& q0, const SpectralTable& table_doubled,
    double t, int workers = 0);

/// Brute-force evaluation of the Q^+/Q^-/Q^r splitting and the smoothed
/// matrices R_t^a(z, z') by direct double summation (finite-range specs on
/// small boxes only).
struct DecompositionTerms {
  Mat r_total, r_plus, r_minus, r_rest;  // 2n x 2n each
};
DecompositionTerms decomposition_oracle(const CovarianceSpec& spec,
                                        int cutoff_a,
                                        const GreenFunction& green,
                                        std::span<const int> z,
                                        std::span<const int> zp);

/// Limit variance of the observable <Y, Psi>_+:
/// sum_{i,j,z,z'} (Q_inf^{ij}(z,z'), Psi^i(z) x Psi^j(z')), with the sums
/// running over the support of Psi.
double limit_quadratic_form(const LimitCovariance& lim, const FieldState& psi);

}  // namespace hcl
