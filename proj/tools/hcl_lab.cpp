// hcl-lab: configuration-driven experiments on half-space harmonic crystals.
#include "CLI11.hpp"
#include "hcl/experiments.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kScientificFailure = 1;
constexpr int kUsageError = 2;

struct Cli {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed = 0;
  bool have_seed = false;
  int workers = -1;
};

int run_command(const std::string& cmd, const Cli& cli) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  if (cmd == "report") {
    std::string dir = cli.out_override.empty() ? "out" : cli.out_override;
    hcl::RunManifest m = hcl::RunManifest::read(dir + "/manifest.json");
    std::vector<std::string> bad = m.verify(dir);
    std::cout << "manifest: " << m.command << " (" << m.artifacts.size()
              << " artifacts, config " << m.config_hash << ", " << m.wall_ms
              << " ms)\n";
    for (const auto& [name, dig] : m.artifacts)
      std::cout << "  " << dig << "  " << name << "\n";
    if (!bad.empty()) {
      for (const auto& name : bad)
        std::cerr << "digest mismatch: " << name << "\n";
      return kScientificFailure;
    }
    std::cout << "all digests verified\n";
    return kOk;
  }

  if (cli.config_path.empty())
    throw std::invalid_argument("--config is required");
  hcl::ExperimentConfig cfg = hcl::load_config(cli.config_path);
  if (cli.have_seed) cfg.seed = cli.seed;
  if (cli.workers >= 0) cfg.workers = cli.workers;
  if (!cli.out_override.empty()) cfg.out = cli.out_override;

  const std::string resolved = cfg.to_json();
  hcl::write_text(cfg.out + "/config.resolved.json", resolved + "\n");

  hcl::RunManifest manifest;
  manifest.command = cmd;
  manifest.config_hash = hcl::digest_hex(resolved);
  manifest.workers = cfg.workers;
  manifest.add(cfg.out, "config.resolved.json");

  int rc = kOk;
  if (cmd == "validate") {
    hcl::ConditionReport rep = hcl::run_validate(cfg);
    hcl::write_text(cfg.out + "/conditions.json", rep.to_json() + "\n");
    hcl::write_text(cfg.out + "/conditions.txt", rep.summary());
    manifest.add(cfg.out, "conditions.json");
    manifest.add(cfg.out, "conditions.txt");
    std::cout << rep.summary();
    rc = rep.any_violated() ? kScientificFailure : kOk;
  } else if (cmd == "dispersion") {
    hcl::write_text(cfg.out + "/dispersion.csv", dispersion_csv(cfg));
    manifest.add(cfg.out, "dispersion.csv");
    std::cout << "wrote " << cfg.out << "/dispersion.csv\n";
  } else if (cmd == "evolve") {
    hcl::run_evolve(cfg, cfg.out, manifest);
    std::cout << "wrote " << cfg.times.size() << " snapshots to " << cfg.out
              << "\n";
  } else if (cmd == "sample") {
    hcl::run_sample(cfg, cfg.out, manifest);
    std::cout << "ensemble checkpoint at " << cfg.out << "/ensemble.bin\n";
  } else if (cmd == "converge") {
    hcl::ConvergenceResult res = hcl::run_converge(cfg);
    hcl::write_text(cfg.out + "/converge.csv", res.csv);
    hcl::write_text(cfg.out + "/converge.json", res.to_json() + "\n");
    manifest.add(cfg.out, "converge.csv");
    manifest.add(cfg.out, "converge.json");
    std::cout << res.to_json() << "\n";
    rc = res.pass() ? kOk : kScientificFailure;
  } else if (cmd == "gaussianity") {
    hcl::GaussianityResult res = hcl::run_gaussianity(cfg);
    hcl::write_text(cfg.out + "/gaussianity.json", res.to_json() + "\n");
    manifest.add(cfg.out, "gaussianity.json");
    std::cout << res.to_json() << "\n";
    for (const auto& rep : res.reports)
      if (rep.applicable && !rep.pass) rc = kScientificFailure;
  } else if (cmd == "decay") {
    hcl::DecayResult res = hcl::run_decay(cfg);
    hcl::write_text(cfg.out + "/decay.csv", res.csv);
    hcl::write_text(cfg.out + "/decay.json", res.to_json() + "\n");
    manifest.add(cfg.out, "decay.csv");
    manifest.add(cfg.out, "decay.json");
    std::cout << res.to_json() << "\n";
    rc = res.pass() ? kOk : kScientificFailure;
  } else {
    throw std::invalid_argument("unknown command " + cmd);
  }

  manifest.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         clock::now() - t0)
                         .count();
  manifest.write(cfg.out);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"half-space harmonic crystal laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  Cli cli;
  app.add_option("--config", cli.config_path, "experiment config (JSON)");
  auto* seed_opt = app.add_option("--seed", cli.seed, "master seed override");
  app.add_option("--workers", cli.workers, "worker thread count (0 = auto)");
  app.add_option("--out", cli.out_override, "output directory override");

  for (const char* name : {"validate", "dispersion", "evolve", "sample",
                           "converge", "gaussianity", "decay", "report"})
    app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsageError;
  }
  cli.have_seed = seed_opt->count() > 0;

  try {
    return run_command(app.get_subcommands().front()->get_name(), cli);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kScientificFailure;
  }
}
