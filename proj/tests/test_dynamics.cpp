#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hcl/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace hcl;

namespace {

constexpr double kPi = std::numbers::pi;

InteractionKernel nn1(int d, double m) {
  return build_nn_kernel(d, 1, Vec::Constant(1, 1.0), Vec::Constant(1, m));
}

FieldState random_state(const Box& box, int n, std::uint64_t seed) {
  FieldState x(box, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  for (long s = 0; s < x.sites(); ++s)
    for (int k = 0; k < n; ++k) {
      x.u(k, s) = dist(rng);
      x.v(k, s) = dist(rng);
    }
  if (box.half) x.clamp_boundary();
  return x;
}

}  // namespace

TEST_CASE("propagator blocks match the matrix exponential") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> tdist(0.1, 50.0);
  for (int n : {1, 2, 3}) {
    Vec gamma(n), mass(n);
    for (int k = 0; k < n; ++k) {
      gamma(k) = 1.0 + 0.3 * k;
      mass(k) = 0.5 + 0.4 * k;
    }
    InteractionKernel kern = build_nn_kernel(1, n, gamma, mass);
    TorusGrid grid(1, 16, true);
    SpectralTable table = build_spectral_table(kern, grid);
    std::uniform_int_distribution<long> fdist(0, grid.size() - 1);
    for (int trial = 0; trial < 12; ++trial) {
      double t = tdist(rng);
      long f = fdist(rng);
      PropagatorSymbol p = propagator_hat(table, t);
      MatC a = MatC::Zero(2 * n, 2 * n);
      a.topRightCorner(n, n) = MatC::Identity(n, n);
      a.bottomLeftCorner(n, n) = -table.at(f).vhat;
      MatC oracle = (a * t).exp();
      CHECK((p.full(f) - oracle).norm() < 1e-10);
    }
  }
}

TEST_CASE("Green function at t = 0 is the identity at the origin") {
  InteractionKernel k = nn1(1, 0.5);
  TorusGrid grid(1, 32, false);
  SpectralTable table = build_spectral_table(k, grid);
  GreenFunction g0 = green_function(table, 0.0);
  CHECK((g0.at(std::vector<int>{0}) - Mat::Identity(2, 2)).norm() < 1e-12);
  for (int z = 1; z < 32; ++z)
    CHECK(g0.at(std::vector<int>{z}).norm() < 1e-12);
}

TEST_CASE("Green function is even under axis-1 reflection") {
  InteractionKernel k = nn1(2, 0.5);
  TorusGrid grid(2, 16, false);
  SpectralTable table = build_spectral_table(k, grid);
  GreenFunction g = green_function(table, 2.5);
  for (int z1 = -7; z1 <= 7; ++z1)
    for (int z2 = -7; z2 <= 7; ++z2) {
      std::vector<int> z{z1, z2}, zr{-z1, z2};
      CHECK((g.at(z) - g.at(zr)).norm() < 1e-10);
    }
}

TEST_CASE("plane wave is an eigenmode of the full evolution") {
  InteractionKernel k = nn1(1, 0.5);
  const int L = 32;
  TorusGrid grid(1, L, false);
  SpectralTable table = build_spectral_table(k, grid);
  const double th = 2.0 * kPi * 5.0 / L;
  const double omega = nn_dispersion(1.0, 0.5, std::vector<double>{th});
  Box box{{L}, false};
  FieldState x(box, 1);
  for (int z = 0; z < L; ++z) x.u(0, z) = std::cos(th * z);
  const double t = 3.7;
  FieldState xt = evolve_full(x, table, t);
  for (int z = 0; z < L; ++z) {
    CHECK(xt.u(0, z) ==
          doctest::Approx(std::cos(th * z) * std::cos(omega * t)).epsilon(1e-9));
    CHECK(xt.v(0, z) == doctest::Approx(-omega * std::cos(th * z) *
                                        std::sin(omega * t))
                            .epsilon(1e-9));
  }
}

TEST_CASE("energy is conserved by the full evolution") {
  InteractionKernel k = nn1(1, 0.5);
  TorusGrid grid(1, 64, false);
  SpectralTable table = build_spectral_table(k, grid);
  FieldState x = random_state(Box{{64}, false}, 1, 21);
  const double e0 = energy(x, k);
  for (double t : {1.0, 7.3, 20.0}) {
    double et = energy(evolve_full(x, table, t), k);
    CHECK(std::abs(et - e0) <= 1e-10 * e0);
  }
}

TEST_CASE("energy of a single-site velocity kick") {
  InteractionKernel k = nn1(1, 0.5);
  FieldState x(Box{{16}, false}, 1);
  x.v(0, 7) = std::sqrt(2.0);
  CHECK(energy(x, k) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("group property and time reversal") {
  InteractionKernel k = nn1(1, 0.5);
  TorusGrid grid(1, 64, false);
  SpectralTable table = build_spectral_table(k, grid);
  FieldState x = random_state(Box{{64}, false}, 1, 5);
  FieldState a = evolve_full(evolve_full(x, table, 3.0), table, 4.5);
  FieldState b = evolve_full(x, table, 7.5);
  CHECK((a.u - b.u).norm() + (a.v - b.v).norm() < 1e-9);
  FieldState back = evolve_full(evolve_full(x, table, 6.0), table, -6.0);
  CHECK((back.u - x.u).norm() + (back.v - x.v).norm() < 1e-9);
}

TEST_CASE("half-space evolution: boundary, image method, duality") {
  InteractionKernel k = nn1(1, 0.5);
  Box half{{32}, true};
  TorusGrid grid(half.doubled().shape.extent, false);
  SpectralTable table = build_spectral_table(k, grid);
  FieldState y0 = random_state(half, 1, 33);
  const double t = 3.0;

  FieldState ya = evolve_half(y0, table, t, HalfMethod::kOddExtension);
  CHECK(ya.boundary_abs_max() <= 1e-12);

  FieldState yb = evolve_half(y0, table, t, HalfMethod::kImage);
  CHECK((ya.u - yb.u).norm() + (ya.v - yb.v).norm() < 1e-10);

  // duality <U_+(t) Y0, Psi>_+ = <Y0, U'_+(t) Psi>_+
  FieldState psi(half, 1);
  psi.u(0, 9) = 1.0;
  psi.v(0, 4) = -0.7;
  double lhs = inner_half(ya, psi);
  double rhs = inner_half(y0, restrict_half(adjoint_evolve(psi, table, t)));
  CHECK(std::abs(lhs - rhs) < 1e-9);
}

TEST_CASE("odd extension restricts back and is antisymmetric") {
  Box half{{16}, true};
  FieldState y = random_state(half, 1, 3);
  FieldState x = odd_extension(y);
  CHECK(x.box.shape.extent[0] == 32);
  FieldState back = restrict_half(x);
  CHECK((back.u - y.u).norm() + (back.v - y.v).norm() == 0.0);
  for (int z = 1; z < 16; ++z)
    CHECK(x.u(0, 32 - z) == doctest::Approx(-x.u(0, z)).epsilon(1e-15));
}

TEST_CASE("velocity-Verlet oracle agrees with the spectral flow") {
  InteractionKernel k = nn1(1, 0.5);
  TorusGrid grid(1, 64, false);
  SpectralTable table = build_spectral_table(k, grid);
  FieldState x = random_state(Box{{64}, false}, 1, 77);
  FieldState spectral = evolve_full(x, table, 5.0);
  FieldState verlet = timestep_oracle(x, k, 5.0, 1e-3);
  CHECK((spectral.u - verlet.u).cwiseAbs().maxCoeff() < 1e-5);
  CHECK((spectral.v - verlet.v).cwiseAbs().maxCoeff() < 1e-5);
  CHECK_THROWS(timestep_oracle(x, k, 1.0, 1.0));  // stability bound
}

TEST_CASE("weighted norm with alpha = -1") {
  Box half{{16}, true};
  FieldState y(half, 1);
  y.u(0, 2) = 1.0;  // |z|^2 = 4
  CHECK(weighted_norm(y, -1.0) ==
        doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("snapshot save/load round trip") {
  Box half{{12}, true};
  FieldState y = random_state(half, 1, 123);
  auto dir = std::filesystem::temp_directory_path() / "hcl_field_io";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "state.bin").string();
  save_field(y, path);
  CHECK(std::filesystem::exists(path + ".json"));
  FieldState z = load_field(path);
  CHECK(z.box == y.box);
  CHECK(z.n == y.n);
  CHECK((z.u - y.u).norm() == 0.0);
  CHECK((z.v - y.v).norm() == 0.0);
  std::string csv = field_slice_csv(y);
  CHECK(csv.find("z1") != std::string::npos);
  std::filesystem::remove_all(dir);
}
