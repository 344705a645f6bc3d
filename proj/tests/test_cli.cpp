#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hcl/harness.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#ifndef HCL_LAB_PATH
#error "HCL_LAB_PATH must point at the CLI binary"
#endif

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(HCL_LAB_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("hcl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string nn_config(int d, double mass, const std::string& extra = "") {
  std::string box = "[64";
  for (int a = 1; a < d; ++a) box += ",16";
  box += "]";
  return std::string("{\"kernel\": {\"family\": \"nearest-neighbor\", \"d\": ") +
         std::to_string(d) +
         ", \"n\": 1, \"gamma\": [1.0], \"mass\": [" + std::to_string(mass) +
         "]}, \"box\": " + box + ", \"grid_n\": 16" + extra + "}";
}

}  // namespace

TEST_CASE("exit codes follow the usage/scientific contract") {
  fs::path dir = scratch("codes");
  std::string good = (dir / "good.json").string();
  std::string bad = (dir / "bad.json").string();
  std::string massless = (dir / "massless.json").string();
  hcl::write_text(good, nn_config(3, 0.0));
  hcl::write_text(bad, "{ this is not json");
  hcl::write_text(massless, nn_config(1, 0.0));

  // a massless three-dimensional crystal satisfies every condition
  CHECK(run("validate --config " + good + " --out " + (dir / "a").string()) ==
        0);
  // the massless chain fails the inverse-symbol integrability scan
  CHECK(run("validate --config " + massless + " --out " +
            (dir / "b").string()) == 1);
  // malformed JSON is a usage error
  CHECK(run("validate --config " + bad + " --out " + (dir / "c").string()) ==
        2);
  // so is a missing config or an unknown subcommand
  CHECK(run("validate") == 2);
  CHECK(run("frobnicate") == 2);
  fs::remove_all(dir);
}

TEST_CASE("dispersion run emits its artifact and manifest") {
  fs::path dir = scratch("disp");
  std::string cfg = (dir / "cfg.json").string();
  hcl::write_text(cfg, nn_config(1, 0.5));
  std::string out = (dir / "out").string();
  CHECK(run("dispersion --config " + cfg + " --out " + out) == 0);
  CHECK(fs::exists(out + "/dispersion.csv"));
  CHECK(fs::exists(out + "/config.resolved.json"));
  CHECK(fs::exists(out + "/manifest.json"));

  // report verifies the digests, and flags tampering
  CHECK(run("report --out " + out) == 0);
  hcl::write_text(out + "/dispersion.csv", "tampered\n");
  CHECK(run("report --out " + out) == 1);
  fs::remove_all(dir);
}

TEST_CASE("evolve runs are byte-identical under a fixed seed") {
  fs::path dir = scratch("det");
  std::string cfg = (dir / "cfg.json").string();
  hcl::write_text(cfg, nn_config(1, 0.5,
                                 ", \"times\": [0.0, 4.0], \"seed\": 11, "
                                 "\"covariance\": {\"kind\": \"triangular\", "
                                 "\"N0\": 2}"));
  std::string out1 = (dir / "r1").string(), out2 = (dir / "r2").string();
  CHECK(run("evolve --config " + cfg + " --out " + out1) == 0);
  CHECK(run("evolve --config " + cfg + " --out " + out2 + " --workers 3") == 0);
  for (const char* name : {"state_t0.bin", "state_t4.bin"}) {
    CAPTURE(name);
    CHECK(hcl::read_text(out1 + "/" + std::string(name)) ==
          hcl::read_text(out2 + "/" + std::string(name)));
  }
  // boundary layer of every half-space snapshot is zero
  hcl::FieldState y = hcl::load_field(out1 + "/state_t4.bin");
  CHECK(y.boundary_abs_max() <= 1e-12);
  fs::remove_all(dir);
}

TEST_CASE("sampling is resumable and worker-count independent") {
  fs::path dir = scratch("sample");
  std::string base = nn_config(
      1, 0.5,
      ", \"times\": [2.0], \"probes\": [[2],[5]], \"seed\": 3, "
      "\"noise\": \"rademacher\", \"covariance\": {\"kind\": \"triangular\", "
      "\"N0\": 2}");
  std::string cfg300 = (dir / "c300.json").string();
  std::string cfg800 = (dir / "c800.json").string();
  hcl::write_text(cfg300, base.substr(0, base.size() - 1) +
                              ", \"ensemble\": 300}");
  hcl::write_text(cfg800, base.substr(0, base.size() - 1) +
                              ", \"ensemble\": 800}");

  std::string direct = (dir / "direct").string();
  std::string rerun = (dir / "rerun").string();
  std::string resumed = (dir / "resumed").string();
  // worker-count independence: fixed sample blocks merged in order
  CHECK(run("sample --config " + cfg800 + " --out " + direct +
            " --workers 1") == 0);
  CHECK(run("sample --config " + cfg800 + " --out " + rerun +
            " --workers 4") == 0);
  CHECK(hcl::read_text(direct + "/ensemble.bin") ==
        hcl::read_text(rerun + "/ensemble.bin"));
  CHECK(fs::exists(direct + "/empirical_covariance.csv"));

  // resuming a checkpoint draws the same per-sample streams; only the
  // summation grouping differs, so the moments agree to rounding
  CHECK(run("sample --config " + cfg300 + " --out " + resumed) == 0);
  CHECK(run("sample --config " + cfg800 + " --out " + resumed) == 0);
  hcl::EnsembleAccumulator a =
      hcl::EnsembleAccumulator::load(direct + "/ensemble.bin");
  hcl::EnsembleAccumulator b =
      hcl::EnsembleAccumulator::load(resumed + "/ensemble.bin");
  CHECK(a.count == 800);
  CHECK(b.count == 800);
  CHECK((a.sum1 - b.sum1).norm() <= 1e-9 * (1.0 + a.sum1.norm()));
  CHECK((a.sum2 - b.sum2).norm() <= 1e-9 * (1.0 + a.sum2.norm()));
  fs::remove_all(dir);
}
