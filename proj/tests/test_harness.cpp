#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hcl/experiments.hpp"
#include "hcl/harness.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <numbers>

using namespace hcl;

namespace {

ExperimentConfig sample_config() {
  ExperimentConfig cfg;
  cfg.kernel =
      build_nn_kernel(1, 1, Vec::Constant(1, 1.0), Vec::Constant(1, 0.5));
  cfg.box = {64};
  cfg.grid_n = 32;
  cfg.covariance.kind = SpecKind::kTriangular;
  cfg.covariance.N0 = 2;
  cfg.cutoff_a = 1;
  cfg.times = {0.0, 2.5, 10.0};
  cfg.probes = {{3}, {4}, {7}};
  cfg.ensemble = 2000;
  cfg.seed = 99;
  cfg.noise = NoiseKind::kRademacher;
  cfg.out = "scratch";
  cfg.workers = 2;
  cfg.psi.kind = PsiConfig::Kind::kWavePacket;
  cfg.psi.center = {20};
  cfg.psi.wavevector = {std::numbers::pi / 2};
  cfg.psi.width = 2.0;
  cfg.psi.block = 1;
  cfg.tol.convergence = 0.04;
  cfg.cond_tol.eps_hess = 1e-5;
  return cfg;
}

}  // namespace

TEST_CASE("experiment config round-trips through JSON") {
  ExperimentConfig cfg = sample_config();
  std::string once = cfg.to_json();
  ExperimentConfig back = ExperimentConfig::from_json(once);
  CHECK(back.to_json() == once);
  CHECK(back.box == cfg.box);
  CHECK(back.seed == cfg.seed);
  CHECK(back.noise == cfg.noise);
  CHECK(back.probes == cfg.probes);
  CHECK(back.psi.kind == PsiConfig::Kind::kWavePacket);
  CHECK(back.psi.width == cfg.psi.width);
  CHECK(back.tol.convergence == cfg.tol.convergence);
  CHECK(back.cond_tol.eps_hess == cfg.cond_tol.eps_hess);
}

TEST_CASE("config validation rejects malformed input") {
  CHECK_THROWS(ExperimentConfig::from_json("{ not json"));
  // box rank must match the kernel dimension
  ExperimentConfig cfg = sample_config();
  nlohmann::json j = nlohmann::json::parse(cfg.to_json());
  j["box"] = {64, 64};
  CHECK_THROWS_AS((void)ExperimentConfig::from_json(j.dump()),
                  std::invalid_argument);
  j["box"] = {1};
  CHECK_THROWS_AS((void)ExperimentConfig::from_json(j.dump()),
                  std::invalid_argument);
}

TEST_CASE("content digests are stable and sensitive") {
  CHECK(digest_hex("") == digest_hex(""));
  CHECK(digest_hex("a") != digest_hex("b"));
  CHECK(digest_hex("abc").size() == 16);
}

TEST_CASE("manifest write, read and verification") {
  auto dir = std::filesystem::temp_directory_path() / "hcl_manifest";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::string base = dir.string();
  write_text(base + "/a.csv", "1,2,3\n");
  write_text(base + "/b.json", "{}\n");

  RunManifest m;
  m.command = "demo";
  m.config_hash = digest_hex("cfg");
  m.workers = 4;
  m.add(base, "a.csv");
  m.add(base, "b.json");
  m.write(base);

  RunManifest back = RunManifest::read(base + "/manifest.json");
  CHECK(back.command == "demo");
  CHECK(back.artifacts.size() == 2);
  CHECK(back.verify(base).empty());

  write_text(base + "/a.csv", "tampered\n");
  std::vector<std::string> bad = back.verify(base);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == "a.csv");
  std::filesystem::remove_all(dir);
}

TEST_CASE("point-mass functionals live strictly inside the half space") {
  Box half{{32}, true};
  PsiConfig psi;
  psi.masses = {{{5}, 0, 0, 1.0}, {{9}, 1, 0, -2.0}};
  FieldState f = build_psi(psi, half, 1);
  CHECK(f.u(0, 5) == 1.0);
  CHECK(f.v(0, 9) == -2.0);
  CHECK(f.boundary_abs_max() == 0.0);

  std::vector<double> center;
  double r = psi_support_radius(psi, center);
  CHECK(center[0] == doctest::Approx(7.0));
  CHECK(r == doctest::Approx(2.0));

  PsiConfig bad;
  bad.masses = {{{0}, 0, 0, 1.0}};
  CHECK_THROWS_AS((void)build_psi(bad, half, 1), std::invalid_argument);
}

TEST_CASE("wave packets are truncated and boundary-clean") {
  Box half{{64}, true};
  PsiConfig psi;
  psi.kind = PsiConfig::Kind::kWavePacket;
  psi.center = {30};
  psi.wavevector = {std::numbers::pi / 2};
  psi.width = 2.0;
  psi.block = 1;
  FieldState f = build_psi(psi, half, 1);
  CHECK(f.boundary_abs_max() == 0.0);
  CHECK(f.u.norm() == 0.0);  // packet sits in the velocity channel
  CHECK(f.v(0, 30) == doctest::Approx(1.0));
  for (int z = 1; z < 64; ++z)
    if (std::abs(z - 30) > 12) CHECK(f.v(0, z) == 0.0);

  std::vector<double> center;
  CHECK(psi_support_radius(psi, center) == doctest::Approx(12.0));
  CHECK(center[0] == doctest::Approx(30.0));
}

TEST_CASE("horizon guard rejects schedules the box cannot hold") {
  ExperimentConfig cfg = sample_config();
  cfg.times = {4000.0};
  ExperimentContext ctx = make_context(cfg);
  CHECK_THROWS_AS(require_horizon(cfg, ctx, 8.0), std::invalid_argument);
  cfg.times = {5.0};
  CHECK_NOTHROW(require_horizon(cfg, ctx, 8.0));
}

TEST_CASE("dispersion table covers all axes and bands") {
  ExperimentConfig cfg = sample_config();
  std::string csv = dispersion_csv(cfg, 16);
  CHECK(csv.rfind("axis,theta,band,omega,domega\n", 0) == 0);
  // header + 16 samples on the single axis of a scalar chain
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
}
