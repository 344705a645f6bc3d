#include "hcl/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hcl {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_pvalue(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * std::pow(-1.0, k - 1) *
                  std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

NormalityReport normality_test(std::span<const double> samples,
                               double target_variance) {
  const long m = static_cast<long>(samples.size());
  if (m < 1000)
    throw std::invalid_argument("normality_test: need at least 1000 samples");

  NormalityReport r;
  r.count = m;
  r.target_variance = target_variance;
  if (target_variance < 1e-14) {
    r.applicable = false;
    return r;
  }

  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= m;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    double c = x - mean;
    m2 += c * c;
    m3 += c * c * c;
    m4 += c * c * c * c;
  }
  m2 /= m;
  m3 /= m;
  m4 /= m;
  r.mean = mean;
  r.variance = m2 * m / std::max<long>(m - 1, 1);
  r.skewness = m3 / std::pow(m2, 1.5);
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  r.skewness_z = r.skewness / std::sqrt(6.0 / m);
  r.kurtosis_z = r.excess_kurtosis / std::sqrt(24.0 / m);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double sigma = std::sqrt(target_variance);
  double d = 0.0;
  for (long i = 0; i < m; ++i) {
    double f = normal_cdf(sorted[i] / sigma);
    d = std::max(d, std::abs(f - static_cast<double>(i) / m));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / m - f));
  }
  r.ks_distance = d;
  r.ks_pvalue = kolmogorov_pvalue(std::sqrt(static_cast<double>(m)) * d);

  r.pass = std::abs(r.skewness_z) <= 4.0 && std::abs(r.kurtosis_z) <= 4.0 &&
           r.ks_pvalue >= 0.01;
  return r;
}

std::string NormalityReport::to_json() const {
  nlohmann::json j;
  j["count"] = count;
  j["mean"] = mean;
  j["variance"] = variance;
  j["target_variance"] = target_variance;
  j["skewness"] = skewness;
  j["excess_kurtosis"] = excess_kurtosis;
  j["skewness_z"] = skewness_z;
  j["kurtosis_z"] = kurtosis_z;
  j["ks_distance"] = ks_distance;
  j["ks_pvalue"] = ks_pvalue;
  j["applicable"] = applicable;
  j["pass"] = pass;
  return j.dump(2);
}

}  // namespace hcl
