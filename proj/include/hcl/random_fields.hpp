#pragma once

#include "hcl/field.hpp"
#include "hcl/spectral.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace hcl {

/// i.i.d. site noise, standardized to mean 0 and variance 1.
enum class NoiseKind { kGaussian, kRademacher, kUniform };

NoiseKind noise_from_string(const std::string& s);
std::string to_string(NoiseKind k);

/// Counter-based seed derivation (splitmix64): per-sample streams are
/// reproducible and independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

enum class SpecKind { kTriangular, kGibbs, kCustomTable };
enum class SamplerRecipe { kAuto, kMovingAverage, kSpectral };

/// Translation-invariant initial covariance: blocks q0^{ij} with zero cross
/// blocks, given either by a finite-range position kernel or by a Fourier
/// symbol. The synthesis recipe is deterministic: the same covariance and
/// seed always reproduce the same field.
struct CovarianceSpec {
  SpecKind kind = SpecKind::kTriangular;
  int d = 1;
  int n = 1;
  int range = 0;  // r0: q0(z) = 0 for |z| >= r0 (finite-range kinds)

  // triangular product f(z1)...f(zd), f(z) = N0 - |z|
  int N0 = 0;

  // Gibbs: q00 = T Vhat^{-1}, q11 = T I (spectral synthesis, Gaussian only;
  // not finite-range, so mixing is not certified by construction)
  double temperature = 0.0;
  InteractionKernel gibbs_kernel;

  // custom finite tables
  std::map<LatticePoint, Mat> table00, table11;

  bool finite_range() const { return kind != SpecKind::kGibbs; }

  /// Fourier symbol of block (i, i) at theta (cross blocks are zero).
  MatC symbol(int block, std::span<const double> theta) const;
  /// Position-space kernel of block (i, i); zero matrix outside the range.
  /// Gibbs kernels are not finite-range and this throws for them.
  Mat position(int block, std::span<const int> z) const;
};

/// q0^{00} = q0^{11} = prod_i f(z_i) with the triangular f; scalar (n = 1).
CovarianceSpec triangular_spec(int N0, int d);

/// Gibbs covariance at temperature T. Requires C0 empty on the table's grid
/// (min eigenvalue of Vhat >= eps0 everywhere).
CovarianceSpec gibbs_spec(double T, const SpectralTable& table,
                          double eps0 = 1e-9);

/// Custom finite-range spec from explicit q00/q11 tables (validated for
/// symmetry; PSD of the symbols is scanned on a coarse grid).
CovarianceSpec custom_spec(int d, int n, std::map<LatticePoint, Mat> q00,
                           std::map<LatticePoint, Mat> q11);

/// Draws one full-space field with covariance spec. u and v blocks are
/// independent. Moving-average recipe: X = g * xi with i.i.d. noise (exact
/// finite-range dependence). Spectral recipe: Xhat = sqrt(qhat) xihat with
/// Gaussian white noise (Hermitian symmetry by construction, field real).
/// Deterministic given (seed, box, spec).
FieldState sample_field(const CovarianceSpec& spec, const Box& box,
                        NoiseKind noise, std::uint64_t seed,
                        SamplerRecipe recipe = SamplerRecipe::kAuto);

/// Cutoff profile: zeta(s) = 0 for s <= 0, 1 for s > a, linear ramp between.
double cutoff_zeta(int s, int a);

/// Y0(z) = zeta(z1) X(z): restriction of a full (doubled) box field to the
/// half slab z1 in 0..L1/2-1 with the boundary cutoff applied.
FieldState cutoff_halfspace(const FieldState& x, int a = 0);

/// Streaming first/second moment sums of (u, v) over a probe set, with
/// associative merge. Index layout: block i (u = 0, v = 1), probe p,
/// component k -> i*n*P + p*n + k.
struct EnsembleAccumulator {
  std::vector<LatticePoint> probes;
  int n = 1;
  long count = 0;
  Vec sum1;
  Mat sum2;     // sums of stacked outer products
  Mat sum2sq;   // elementwise squares, for standard errors

  EnsembleAccumulator() = default;
  EnsembleAccumulator(std::vector<LatticePoint> probes_, int n_);

  long dim() const { return 2L * n * static_cast<long>(probes.size()); }
  void accumulate(const FieldState& y);
  void merge(const EnsembleAccumulator& other);

  /// Binary checkpoint with a JSON header (probe set, n, count).
  void save(const std::string& path) const;
  static EnsembleAccumulator load(const std::string& path);
};

}  // namespace hcl
