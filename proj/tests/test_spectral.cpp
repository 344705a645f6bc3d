#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hcl/conditions.hpp"
#include "hcl/fft.hpp"
#include "hcl/kernel.hpp"
#include "hcl/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hcl;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("nearest-neighbor kernel table") {
  Vec gamma = Vec::Constant(1, 1.0), mass = Vec::Constant(1, 0.5);
  InteractionKernel k = build_nn_kernel(2, 1, gamma, mass);
  CHECK(k.d == 2);
  CHECK(k.radius == 1);
  // diagonal entry 2 d gamma + m^2, neighbors -gamma
  CHECK((*k.at(std::vector<int>{0, 0}))(0, 0) == doctest::Approx(4.25));
  CHECK((*k.at(std::vector<int>{1, 0}))(0, 0) == doctest::Approx(-1.0));
  CHECK((*k.at(std::vector<int>{0, -1}))(0, 0) == doctest::Approx(-1.0));
  CHECK(k.at(std::vector<int>{1, 1}) == nullptr);
  CHECK(k.check_symmetry());
  CHECK(k.check_even_in_z1());
}

TEST_CASE("kernel JSON round trip") {
  Vec gamma(2), mass(2);
  gamma << 1.0, 1.3;
  mass << 0.5, 0.9;
  InteractionKernel k = build_nn_kernel(1, 2, gamma, mass);
  InteractionKernel k2 = kernel_from_json(kernel_to_json(k));
  CHECK(k2.d == k.d);
  CHECK(k2.n == k.n);
  REQUIRE(k2.table.size() == k.table.size());
  for (const auto& [z, m] : k.table)
    CHECK((*k2.at(z) - m).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("symbol values at marked angles") {
  Vec g1 = Vec::Constant(1, 1.0);
  // massless chain at theta = pi: Vhat = 2(1 - cos pi) = 4
  InteractionKernel k0 = build_nn_kernel(1, 1, g1, Vec::Constant(1, 0.0));
  std::vector<double> th{kPi};
  CHECK(symbol_at(k0, th)(0, 0).real() == doctest::Approx(4.0).epsilon(1e-14));
  // m = 0.5 at theta = 0: Vhat = m^2 = 0.25
  InteractionKernel k5 = build_nn_kernel(1, 1, g1, Vec::Constant(1, 0.5));
  std::vector<double> z0{0.0};
  CHECK(symbol_at(k5, z0)(0, 0).real() == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("dispersion matches the closed form on the grid") {
  for (int d : {1, 2, 3}) {
    Vec gamma(2), mass(2);
    gamma << 1.0, 1.3;
    mass << 0.5, 0.9;
    InteractionKernel k = build_nn_kernel(d, 2, gamma, mass);
    TorusGrid grid(d, 8, true);
    SpectralTable table = build_spectral_table(k, grid);
    for (long f = 0; f < grid.size(); ++f) {
      std::vector<double> th = grid.point(f);
      std::vector<double> analytic{nn_dispersion(gamma(0), mass(0), th),
                                   nn_dispersion(gamma(1), mass(1), th)};
      std::sort(analytic.begin(), analytic.end());
      std::vector<double> numeric;
      for (const Band& b : table.at(f).bands)
        for (int m = 0; m < b.multiplicity; ++m) numeric.push_back(b.omega);
      REQUIRE(numeric.size() == 2);
      for (int i = 0; i < 2; ++i)
        CHECK(std::abs(numeric[i] - analytic[i]) < 1e-12);
    }
  }
}

TEST_CASE("spectral projections resolve the identity and the symbol") {
  Vec gamma(2), mass(2);
  gamma << 1.0, 1.3;
  mass << 0.5, 0.9;
  InteractionKernel k = build_nn_kernel(2, 2, gamma, mass);
  TorusGrid grid(2, 8, true);
  SpectralTable table = build_spectral_table(k, grid);
  for (long f = 0; f < grid.size(); ++f) {
    const SpectralEntry& e = table.at(f);
    MatC sum = MatC::Zero(2, 2), omega = MatC::Zero(2, 2);
    for (size_t a = 0; a < e.bands.size(); ++a) {
      const MatC& p = e.bands[a].projection;
      CHECK((p * p - p).norm() < 1e-10);          // idempotent
      CHECK((p - p.adjoint()).norm() < 1e-10);    // orthogonal
      for (size_t b = a + 1; b < e.bands.size(); ++b)
        CHECK((p * e.bands[b].projection).norm() < 1e-10);
      sum += p;
      omega += e.bands[a].omega * p;
    }
    CHECK((sum - MatC::Identity(2, 2)).norm() < 1e-10);
    CHECK((omega - e.omega).norm() < 1e-10);
    CHECK((e.omega * e.omega - e.vhat).norm() < 1e-10);
  }
}

TEST_CASE("matrix functions of the dispersion") {
  Vec g = Vec::Constant(1, 1.0), m = Vec::Constant(1, 0.5);
  InteractionKernel k = build_nn_kernel(1, 1, g, m);
  TorusGrid grid(1, 16, true);
  SpectralTable table = build_spectral_table(k, grid);
  const SpectralEntry& e = table.at(3);
  MatC sq = matrix_function(e, [](double w) { return w * w; });
  CHECK((sq - e.vhat).norm() < 1e-12);
  MatC inv = matrix_function_positive(
      e, [](double w) { return 1.0 / w; }, 1e-9);
  CHECK((inv * e.omega - MatC::Identity(1, 1)).norm() < 1e-12);
}

TEST_CASE("sinc block is finite and equals t at an acoustic point") {
  Vec g = Vec::Constant(1, 1.0), m = Vec::Constant(1, 0.0);
  InteractionKernel k = build_nn_kernel(1, 1, g, m);
  TorusGrid grid(1, 16, false);  // plain grid samples theta = 0
  SpectralTable table = build_spectral_table(k, grid);
  const SpectralEntry& e0 = table.at(0);  // omega(0) = 0
  REQUIRE(e0.bands.front().omega == doctest::Approx(0.0));
  MatC s = sin_omega_t_over_omega(e0, 3.5);
  CHECK(s(0, 0).real() == doctest::Approx(3.5).epsilon(1e-14));
}

TEST_CASE("group-velocity sign along axis 1") {
  Vec g = Vec::Constant(1, 1.0), m = Vec::Constant(1, 0.5);
  InteractionKernel k = build_nn_kernel(1, 1, g, m);
  TorusGrid grid(1, 32, true);
  SpectralTable table = build_spectral_table(k, grid);
  for (long f = 0; f < grid.size(); ++f) {
    double th = grid.point(f)[0];
    int expected = std::sin(th) > 0 ? 1 : (std::sin(th) < 0 ? -1 : 0);
    CHECK(table.at(f).bands.front().sign1 == expected);
  }
  CHECK(table.group_velocity() > 0.5);
  CHECK(table.group_velocity() < 1.0);
}

TEST_CASE("condition checks on the nearest-neighbor family") {
  auto nn = [](int d, double m) {
    return build_nn_kernel(d, 1, Vec::Constant(1, 1.0), Vec::Constant(1, m));
  };
  SUBCASE("massive chain passes") {
    ConditionReport rep =
        validate_conditions(nn(1, 1.0), TorusGrid(1, 64, true));
    CHECK_FALSE(rep.any_violated());
  }
  SUBCASE("massless chain fails the integrability scan") {
    ConditionReport rep =
        validate_conditions(nn(1, 0.0), TorusGrid(1, 64, true));
    CHECK(rep.e6.status == ConditionStatus::kViolated);
    CHECK(rep.any_violated());
  }
  SUBCASE("massless three-dimensional crystal passes") {
    ConditionReport rep =
        validate_conditions(nn(3, 0.0), TorusGrid(3, 16, true));
    CHECK_FALSE(rep.any_violated());
  }
}

TEST_CASE("DFT round trip and offset inverse") {
  Shape sh{{8}};
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist;
  VecC x(8);
  for (int i = 0; i < 8; ++i) x(i) = Complex(dist(rng), dist(rng));
  VecC y = x;
  dft_forward(sh, y);
  // forward convention: sum_z x(z) exp(+i z theta)
  Complex direct = 0.0;
  for (int z = 0; z < 8; ++z)
    direct += x(z) * std::exp(Complex(0.0, z * 2.0 * kPi * 3.0 / 8.0));
  CHECK(std::abs(y(3) - direct) < 1e-12);
  dft_inverse(sh, y);
  CHECK((y - x).norm() < 1e-12);

  // offset inverse vs the direct midpoint sum, signed representative storage
  VecC f(8);
  for (int i = 0; i < 8; ++i) f(i) = Complex(dist(rng), dist(rng));
  VecC g = f;
  dft_inverse_offset(sh, g);
  for (int z = -3; z <= 3; ++z) {
    Complex s = 0.0;
    for (int kk = 0; kk < 8; ++kk) {
      double th = 2.0 * kPi * (kk + 0.5) / 8.0;
      s += f(kk) * std::exp(Complex(0.0, -z * th));
    }
    s /= 8.0;
    std::vector<int> idx{z};
    CHECK(std::abs(g(sh.flat_wrapped(idx)) - s) < 1e-12);
  }
}

TEST_CASE("shape bookkeeping") {
  Shape sh{{4, 6}};
  CHECK(sh.size() == 24);
  std::vector<int> idx{3, 5};
  long f = sh.flat(idx);
  std::vector<int> back(2);
  sh.unflatten(f, back);
  CHECK(back == idx);
  std::vector<int> wrapped{-1, 7};
  CHECK(sh.flat_wrapped(wrapped) == sh.flat(std::vector<int>{3, 1}));
  CHECK(sh.signed_coord(3, 0) == -1);
  CHECK(sh.signed_coord(1, 0) == 1);
}

TEST_CASE("half box horizon guard and doubling") {
  Box half{{64}, true};
  Box dbl = half.doubled();
  CHECK(dbl.shape.extent[0] == 128);
  CHECK_FALSE(dbl.half);
  CHECK(dbl.horizon_ok(10.0, 1.0, 5.0, 2.0));      // 128 > 2*17
  CHECK_FALSE(dbl.horizon_ok(60.0, 1.0, 5.0, 2.0));  // 128 < 2*67
}
