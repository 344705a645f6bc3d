#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hcl/random_fields.hpp"
#include "hcl/stats.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace hcl;

namespace {

/// Empirical estimate of E[u(z*) u(z* + r)] with its standard error.
struct MomentEstimate {
  double mean = 0.0, stderr_ = 0.0;
};

MomentEstimate product_moment(const CovarianceSpec& spec, const Box& box,
                              NoiseKind noise, SamplerRecipe recipe, int zstar,
                              int r, long m_samples, std::uint64_t seed) {
  double s1 = 0.0, s2 = 0.0;
  for (long m = 0; m < m_samples; ++m) {
    FieldState x =
        sample_field(spec, box, noise, derive_seed(seed, m), recipe);
    double prod = x.u(0, zstar) * x.u(0, zstar + r);
    s1 += prod;
    s2 += prod * prod;
  }
  MomentEstimate e;
  e.mean = s1 / m_samples;
  double var = (s2 / m_samples - e.mean * e.mean) / (m_samples - 1);
  e.stderr_ = std::sqrt(std::max(0.0, var));
  return e;
}

}  // namespace

TEST_CASE("triangular covariance spec") {
  CovarianceSpec s2 = triangular_spec(2, 2);
  CHECK(s2.position(0, std::vector<int>{0, 0})(0, 0) ==
        doctest::Approx(4.0));  // N0^d
  CHECK(s2.position(0, std::vector<int>{1, -1})(0, 0) == doctest::Approx(1.0));
  CHECK(s2.position(0, std::vector<int>{2, 0})(0, 0) == doctest::Approx(0.0));
  CHECK(s2.position(1, std::vector<int>{0, 0})(0, 0) == doctest::Approx(4.0));
  // per-axis symbol (1 - cos N0 theta)/(1 - cos theta) vanishes at pi for N0=2
  CovarianceSpec s1 = triangular_spec(2, 1);
  CHECK(std::abs(s1.symbol(0, std::vector<double>{std::numbers::pi})(0, 0)) <
        1e-12);
  // PSD scan of the symbol
  for (int k = 0; k < 16; ++k) {
    double th = 2.0 * std::numbers::pi * (k + 0.5) / 16;
    CHECK(s1.symbol(0, std::vector<double>{th})(0, 0).real() >= -1e-12);
  }
}

TEST_CASE("Gibbs spec inverts the symbol") {
  InteractionKernel k =
      build_nn_kernel(1, 1, Vec::Constant(1, 1.0), Vec::Constant(1, 1.0));
  TorusGrid grid(1, 32, true);
  SpectralTable table = build_spectral_table(k, grid);
  CovarianceSpec g = gibbs_spec(2.0, table);
  // Vhat(pi) = 4 + 1 = 5, so q00(pi) = T / 5
  std::vector<double> th{std::numbers::pi};
  CHECK(g.symbol(0, th)(0, 0).real() == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(g.symbol(1, th)(0, 0).real() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(g.finite_range());
}

TEST_CASE("samplers are deterministic per seed") {
  CovarianceSpec spec = triangular_spec(2, 1);
  Box box{{32}, false};
  FieldState a = sample_field(spec, box, NoiseKind::kGaussian, 42);
  FieldState b = sample_field(spec, box, NoiseKind::kGaussian, 42);
  FieldState c = sample_field(spec, box, NoiseKind::kGaussian, 43);
  CHECK((a.u - b.u).norm() == 0.0);
  CHECK((a.v - b.v).norm() == 0.0);
  CHECK((a.u - c.u).norm() > 1e-6);
}

TEST_CASE("moving-average sampler reproduces the triangular covariance") {
  CovarianceSpec spec = triangular_spec(2, 1);
  Box box{{32}, false};
  const long M = 10000;
  // variance at a site: q0(0) = N0 = 2 within the chi-squared error bar
  MomentEstimate v = product_moment(spec, box, NoiseKind::kRademacher,
                                    SamplerRecipe::kMovingAverage, 16, 0, M, 1);
  CHECK(std::abs(v.mean - 2.0) <= 4.0 * std::sqrt(2.0 / M) * 2.0);
  // lag 1: q0(1) = 1
  MomentEstimate l1 = product_moment(spec, box, NoiseKind::kRademacher,
                                     SamplerRecipe::kMovingAverage, 16, 1, M, 2);
  CHECK(std::abs(l1.mean - 1.0) <= 4.0 * l1.stderr_);
  // beyond the range: q0(r) = 0 for |r| >= N0
  for (int r : {2, 3, 5}) {
    MomentEstimate lr =
        product_moment(spec, box, NoiseKind::kRademacher,
                       SamplerRecipe::kMovingAverage, 16, r, M, 3 + r);
    CHECK(std::abs(lr.mean) <= 4.0 * lr.stderr_);
  }
}

TEST_CASE("spectral sampler reproduces the triangular covariance") {
  CovarianceSpec spec = triangular_spec(2, 1);
  Box box{{32}, false};
  const long M = 10000;
  MomentEstimate v = product_moment(spec, box, NoiseKind::kGaussian,
                                    SamplerRecipe::kSpectral, 16, 0, M, 9);
  CHECK(std::abs(v.mean - 2.0) <= 4.0 * std::sqrt(2.0 / M) * 2.0);
  MomentEstimate l1 = product_moment(spec, box, NoiseKind::kGaussian,
                                     SamplerRecipe::kSpectral, 16, 1, M, 10);
  CHECK(std::abs(l1.mean - 1.0) <= 4.0 * l1.stderr_);
}

TEST_CASE("cutoff profile and half-space restriction") {
  CHECK(cutoff_zeta(0, 0) == 0.0);
  CHECK(cutoff_zeta(1, 0) == 1.0);
  CHECK(cutoff_zeta(-3, 2) == 0.0);
  CHECK(cutoff_zeta(1, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(cutoff_zeta(2, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(cutoff_zeta(3, 2) == 1.0);

  CovarianceSpec spec = triangular_spec(2, 1);
  Box dbl{{32}, false};
  FieldState x = sample_field(spec, dbl, NoiseKind::kGaussian, 4);
  FieldState y = cutoff_halfspace(x, 0);
  CHECK(y.box.half);
  CHECK(y.box.shape.extent[0] == 16);
  CHECK(y.boundary_abs_max() == 0.0);
  for (int z = 1; z < 16; ++z)
    CHECK(y.u(0, z) == doctest::Approx(x.u(0, z)).epsilon(1e-15));
}

TEST_CASE("accumulator merge equals sequential accumulation") {
  CovarianceSpec spec = triangular_spec(2, 1);
  Box dbl{{32}, false};
  std::vector<LatticePoint> probes{{2}, {5}, {9}};
  EnsembleAccumulator seq(probes, 1), a(probes, 1), b(probes, 1);
  for (long m = 0; m < 40; ++m) {
    FieldState y = cutoff_halfspace(
        sample_field(spec, dbl, NoiseKind::kUniform, derive_seed(7, m)), 0);
    seq.accumulate(y);
    (m < 25 ? a : b).accumulate(y);
  }
  a.merge(b);
  CHECK(a.count == seq.count);
  CHECK((a.sum1 - seq.sum1).norm() < 1e-12);
  CHECK((a.sum2 - seq.sum2).norm() < 1e-12);

  auto dir = std::filesystem::temp_directory_path() / "hcl_acc_io";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "acc.bin").string();
  a.save(path);
  EnsembleAccumulator back = EnsembleAccumulator::load(path);
  CHECK(back.count == a.count);
  CHECK(back.probes == a.probes);
  CHECK((back.sum2 - a.sum2).norm() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("seed derivation separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}

TEST_CASE("normality test calibration") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  std::vector<double> gauss(10000), rad(10000);
  for (double& x : gauss) x = normal(rng);
  for (double& x : rad) x = (rng() & 1) ? 1.0 : -1.0;

  NormalityReport ok = normality_test(gauss, 1.0);
  CHECK(ok.applicable);
  CHECK(ok.pass);

  NormalityReport bad = normality_test(rad, 1.0);
  CHECK(bad.applicable);
  CHECK_FALSE(bad.pass);
  CHECK(bad.kurtosis_z < -4.0);  // excess kurtosis -2 at this sample size

  NormalityReport degenerate = normality_test(gauss, 1e-16);
  CHECK_FALSE(degenerate.applicable);
}
