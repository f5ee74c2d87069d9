#pragma once

#include <string>
#include <vector>

#include "cgmc/lattice_model.hpp"
#include "cgmc/samplers.hpp"
#include "cgmc/toml_lite.hpp"

namespace cgmc {

// One experiment = one TOML file. CLI flags (--seed, --out, --threads)
// override the corresponding keys after loading.
struct ExperimentConfig {
  // [model]
  int n = 1024;
  double k = 1.0;
  double j = 5.0;
  std::string long_kind = "mean-field";  // "mean-field" | "triangle"
  int range = 0;                         // triangle kernel range; 0 means n/2

  // [field]: single point for `sample`, grid for `exact-curve` and `sweep`
  double h = -3.0;
  double h_start = -4.2;
  double h_stop = -2.8;
  int h_count = 20;

  // [sampler]
  std::int64_t steps = 120000;
  std::int64_t burn_in = 20000;
  std::int64_t thinning = 1;
  std::string init = "exact";  // all-empty | all-full | bernoulli | exact
  double init_density = 0.5;
  bool record_series = false;
  std::string sample_method = "classical";  // `sample` subcommand only

  // [sweep]
  std::vector<int> qs = {4, 8};
  int replicates = 4;

  // [bench]
  std::vector<int> bench_qs = {2, 4, 8, 16};
  std::int64_t bench_steps = 200000;

  // [run]
  std::uint64_t seed = 20110905;
  int threads = 0;  // 0 = hardware concurrency
  std::string out_dir = "out";

  static ExperimentConfig from_table(const toml::Table& table);
  static ExperimentConfig from_file(const std::string& path);

  // throws ConfigError describing the first violated constraint
  void validate() const;

  ModelSpec model_at(double field) const;
  std::vector<double> field_grid() const;
  InitMode init_mode() const;
};

// Deterministic per-chain seed from the experiment seed and task identity.
std::uint64_t chain_seed(std::uint64_t base, double field, int method_tag, int replicate);

}  // namespace cgmc
