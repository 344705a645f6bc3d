#pragma once

#include <span>
#include <string>

namespace hcl {

/// Normality verdict for a sample of scalar observables against a target
/// N(0, variance) law: moment z-scores plus a Kolmogorov-Smirnov distance.
struct NormalityReport {
  long count = 0;
  double mean = 0.0;
  double variance = 0.0;       // sample variance
  double target_variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double skewness_z = 0.0;     // skewness / sqrt(6/M)
  double kurtosis_z = 0.0;     // excess kurtosis / sqrt(24/M)
  double ks_distance = 0.0;
  double ks_pvalue = 0.0;
  bool applicable = true;      // false when the target variance is degenerate
  bool pass = false;           // |z| <= 4 for both moments and KS p >= 0.01

  std::string to_json() const;
};

/// Standard normal CDF.
double normal_cdf(double x);

/// Asymptotic Kolmogorov distribution tail: P(sqrt(M) D > lambda).
double kolmogorov_pvalue(double lambda);

/// Tests the sample against N(0, target_variance). Needs >= 1000 samples;
/// a target variance below 1e-14 yields a not-applicable verdict.
NormalityReport normality_test(std::span<const double> samples,
                               double target_variance);

}  // namespace hcl
