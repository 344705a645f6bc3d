#pragma once

#include "hcl/conditions.hpp"
#include "hcl/random_fields.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hcl {

/// One weighted point mass of a test functional.
struct PointMass {
  LatticePoint z;
  int block = 0;      // 0 = u, 1 = v
  int component = 0;  // 0..n-1
  double value = 1.0;
};

/// Test functional Psi: either explicit point masses or a compactly
/// supported wave packet exp(-|z-z0|^2 / 2w^2) cos(k.(z-z0)), truncated at
/// |z - z0| > 6w, placed in one (block, component) channel.
struct PsiConfig {
  enum class Kind { kPointMasses, kWavePacket };
  Kind kind = Kind::kPointMasses;
  std::vector<PointMass> masses;
  LatticePoint center;
  std::vector<double> wavevector;
  double width = 4.0;
  int block = 0;
  int component = 0;
};

FieldState build_psi(const PsiConfig& psi, const Box& half_box, int n);
/// Smallest radius around `center` containing the support (0 for point
/// masses; the truncation radius for wave packets). `center` receives the
/// support centroid.
double psi_support_radius(const PsiConfig& psi, std::vector<double>& center);

/// Scientific pass/fail thresholds, overridable per config.
struct Tolerances {
  double convergence = 0.05;    // final relative error of Q_t vs Q_inf
  double slack = 1.2;           // allowed non-monotonicity factor per step
  double refinement = 0.01;     // Q_inf change under grid doubling
  double stationarity = 0.02;
  double decay_slope = 0.15;    // |fitted slope + d/2| bound
  double cone_mass = 1e-6;
};

/// Declarative covariance choice; materialized against a spectral table
/// because the Gibbs symbol needs one.
struct CovarianceConfig {
  SpecKind kind = SpecKind::kTriangular;
  int N0 = 2;
  double temperature = 1.0;
  std::map<LatticePoint, Mat> q00, q11;

  CovarianceSpec build(int d, int n, const SpectralTable& offset_table) const;
};

/// Everything a run needs; round-trips through JSON losslessly.
struct ExperimentConfig {
  InteractionKernel kernel;
  std::vector<int> box;  // half-box extents; axis 0 is the slab depth L1
  int grid_n = 64;       // points per axis for condition scans / dispersion
  CovarianceConfig covariance;
  int cutoff_a = 0;
  std::vector<double> times;
  std::vector<LatticePoint> probes;
  long ensemble = 0;
  std::uint64_t seed = 1;
  NoiseKind noise = NoiseKind::kGaussian;
  std::string out = "out";
  int workers = 0;
  PsiConfig psi;
  Tolerances tol;
  ConditionTolerances cond_tol;

  Box half_box() const { return Box{box, true}; }
  int d() const { return kernel.d; }
  int n() const { return kernel.n; }

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
};

ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64-bit content digest, hex-encoded.
std::uint64_t fnv1a64(std::string_view data);
std::string digest_hex(std::string_view data);
std::string file_digest(const std::string& path);

/// Run provenance: resolved-config hash plus per-artifact digests.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string code_version = "hcl 0.1.0";
  long wall_ms = 0;
  int workers = 0;
  std::vector<std::pair<std::string, std::string>> artifacts;  // path, digest

  /// Digests the file and records it under its path relative to base.
  void add(const std::string& base_dir, const std::string& name);
  void write(const std::string& base_dir) const;  // base/manifest.json
  static RunManifest read(const std::string& path);
  /// Re-digests every listed artifact; returns the mismatches.
  std::vector<std::string> verify(const std::string& base_dir) const;
};

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace hcl
