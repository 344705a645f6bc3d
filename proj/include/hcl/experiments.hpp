#pragma once

#include "hcl/covariance.hpp"
#include "hcl/harness.hpp"
#include "hcl/stats.hpp"

namespace hcl {

/// Lattice/spectral machinery shared by the experiment drivers, built once
/// per config: the half box, its doubled periodic box, spectral tables on
/// both the plain and the half-cell-offset grid of the doubled extents, and
/// the materialized covariance spec.
struct ExperimentContext {
  Box half;
  Box dbl;
  SpectralTable plain;
  SpectralTable offset;
  CovarianceSpec spec;
};

ExperimentContext make_context(const ExperimentConfig& cfg);

/// Throws (config error) when the box cannot hold the schedule: wrapping
/// would reach back into the observation region before max(times).
void require_horizon(const ExperimentConfig& cfg, const ExperimentContext& ctx,
                     double r_obs);

ConditionReport run_validate(const ExperimentConfig& cfg);

/// Band functions along the axis paths theta = t e_a, with d omega / d theta
/// along the path. CSV columns: axis, theta, band, omega, domega.
std::string dispersion_csv(const ExperimentConfig& cfg, int samples = 256);

struct ConvergenceResult {
  std::vector<double> times;
  std::vector<double> errors;      // max blockwise relative error per t
  double refinement_change = 0.0;  // Q_inf change under grid doubling
  double tolerance = 0.0;
  bool monotone_ok = false, final_ok = false, refinement_ok = false;
  std::string csv;  // per (t, probe pair) errors

  bool pass() const { return monotone_ok && final_ok && refinement_ok; }
  std::string to_json() const;
};
ConvergenceResult run_converge(const ExperimentConfig& cfg);

struct StationarityResult {
  std::vector<double> times;
  std::vector<double> errors;
  double tolerance = 0.0;
  bool pass = false;
  std::string to_json() const;
};
/// Propagates the limit covariance itself and compares against it.
StationarityResult run_stationarity(const ExperimentConfig& cfg);

struct GaussianityResult {
  double limit_variance = 0.0;
  std::vector<double> times;
  std::vector<NormalityReport> reports;
  std::string to_json() const;
};
/// Monte Carlo law of <Y(t), Psi>_+ via duality <Y0, U'_+(t) Psi>_+, tested
/// against N(0, Q_inf(Psi, Psi)).
GaussianityResult run_gaussianity(const ExperimentConfig& cfg);

struct DecayResult {
  std::vector<double> times;
  std::vector<double> sup_phi;
  std::vector<double> cone_fraction;  // field mass outside |z| > gamma_v t
  double slope = 0.0, expected_slope = 0.0, gamma_v = 0.0;
  bool slope_ok = false, cone_ok = false;
  std::string csv;

  bool pass() const { return slope_ok && cone_ok; }
  std::string to_json() const;
};
DecayResult run_decay(const ExperimentConfig& cfg);

/// Deterministic snapshot run: one seeded initial state, evolved to every t
/// in the schedule; writes binary snapshots plus slice CSVs into out_dir and
/// records them in the manifest.
void run_evolve(const ExperimentConfig& cfg, const std::string& out_dir,
                RunManifest& manifest);

/// Resumable ensemble generation: extends out_dir/ensemble.bin to the
/// configured sample count (each sample evolved to the last schedule time)
/// and writes the empirical covariance CSV.
void run_sample(const ExperimentConfig& cfg, const std::string& out_dir,
                RunManifest& manifest);

}  // namespace hcl
