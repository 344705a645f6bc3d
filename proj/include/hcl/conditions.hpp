#pragma once

#include "hcl/spectral.hpp"

#include <string>

namespace hcl {

enum class ConditionStatus {
  kVerifiedExact,
  kVerifiedSampled,
  kViolated,
  kNotApplicable
};

std::string to_string(ConditionStatus s);

/// Outcome of checking E0-E6 for one kernel. E0/E1/E2 are exact on the
/// support table; E3-E6 are grid scans and are never reported better than
/// verified-sampled.
struct ConditionReport {
  struct Entry {
    ConditionStatus status = ConditionStatus::kNotApplicable;
    std::string witness;  // human-readable detail
  };
  Entry e0, e1, e2, e3, e4, e5, e6;

  // critical-set scan
  long near_c0_points = 0;      // grid points with det Vhat < eps0
  long near_degenerate = 0;     // grid points with |det Hess omega| < eps_h
  double hess_degenerate_fraction = 0.0;
  double vinv_quadrature = 0.0;        // estimate of int ||Vhat^-1||
  double vinv_quadrature_refined = 0.0;

  bool any_violated() const;
  std::string to_json() const;
  std::string summary() const;
};

struct ConditionTolerances {
  double eps0 = 1e-9;        // near-singular symbol threshold
  double eps_hess = 1e-6;    // |det Hess omega| below this is near-degenerate
  double eps_const = 1e-9;   // E5 constancy detection
  double divergence_factor = 0.75;  // E6 flagged when successive quadrature
                                    // increments shrink slower than this
                                    // ratio (divergent integrals give >= 1)
};

/// Checks E0-E6 on the kernel: E0/E1/E2 exactly, E3 by min-eigenvalue scan,
/// E4 by finite-difference Hessians away from near-degenerate points, E5 by
/// scanning omega_s +- omega_s' for nonzero constancy, E6 by midpoint
/// quadrature of ||Vhat^{-1}|| on the offset grid at three resolutions.
/// Violations land in the report; only malformed input throws.
ConditionReport validate_conditions(const InteractionKernel& kernel,
                                    const TorusGrid& grid,
                                    const ConditionTolerances& tol = {},
                                    int workers = 0);

}  // namespace hcl
