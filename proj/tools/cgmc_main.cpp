#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cgmc/harness.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = -1;
  bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment TOML file");
  cmd->add_option("--out", flags.out_dir, "output directory (overrides run.out)");
  cmd->add_option("--seed", flags.seed, "seed base (overrides run.seed)")
      ->each([&flags](const std::string&) { flags.has_seed = true; });
  cmd->add_option("--threads", flags.threads, "worker threads, 0 = all cores (overrides run.threads)");
}

int load_config(const CommonFlags& flags, cgmc::ExperimentConfig& config) {
  try {
    if (!flags.config_path.empty()) config = cgmc::ExperimentConfig::from_file(flags.config_path);
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (flags.has_seed) config.seed = flags.seed;
    if (flags.threads >= 0) config.threads = flags.threads;
    return 0;
  } catch (const cgmc::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs sampling of 1-D lattice gases with short- and long-range interactions:\n"
               "single-spin-flip Metropolis and the coupled coarse-grained two-stage sampler,\n"
               "with exact oracles and benchmarks."};
  app.require_subcommand(1);

  CommonFlags curve_flags, sample_flags, sweep_flags, verify_flags, bench_flags;
  CLI::App* curve = app.add_subcommand("exact-curve", "write the exact coverage-vs-field curve");
  add_common(curve, curve_flags);
  CLI::App* sample = app.add_subcommand("sample", "run one chain and report coverage statistics");
  add_common(sample, sample_flags);
  CLI::App* sweep = app.add_subcommand("sweep", "field sweep comparing both samplers to the oracle");
  add_common(sweep, sweep_flags);
  CLI::App* verify = app.add_subcommand("verify", "exact small-system correctness battery");
  add_common(verify, verify_flags);
  CLI::App* bench = app.add_subcommand("bench", "cost benchmark with the tabulated kernel");
  add_common(bench, bench_flags);

  CLI11_PARSE(app, argc, argv);

  cgmc::ExperimentConfig config;
  if (curve->parsed()) {
    if (int rc = load_config(curve_flags, config)) return rc;
    return cgmc::cmd_exact_curve(config);
  }
  if (sample->parsed()) {
    if (int rc = load_config(sample_flags, config)) return rc;
    return cgmc::cmd_sample(config);
  }
  if (sweep->parsed()) {
    if (int rc = load_config(sweep_flags, config)) return rc;
    return cgmc::cmd_sweep(config);
  }
  if (verify->parsed()) {
    if (int rc = load_config(verify_flags, config)) return rc;
    return cgmc::cmd_verify(config);
  }
  if (bench->parsed()) {
    if (int rc = load_config(bench_flags, config)) return rc;
    return cgmc::cmd_bench(config);
  }
  return 1;
}
