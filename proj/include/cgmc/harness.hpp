#pragma once

#include <string>
#include <vector>

#include "cgmc/config.hpp"
#include "cgmc/exact_oracles.hpp"

namespace cgmc {

// Replicate-pooled chain results at one (field, method) point.
struct MethodAggregate {
  double mean = 0.0;
  double se = 0.0;  // pooled standard error of the replicate average
  double coarse_rate = 0.0;
  double fine_given_coarse_rate = 0.0;
  double overall_rate = 0.0;
  std::uint64_t n_proposed = 0;
  std::uint64_t n_coarse_accepted = 0;
  std::uint64_t n_fine_accepted = 0;
  std::uint64_t n_fine_steps = 0;
  std::uint64_t longrange_pair_evals = 0;
  std::uint64_t coarse_pair_evals = 0;
  std::uint64_t wall_nanos = 0;
};

struct SweepRow {
  double h = 0.0;
  double m_exact = 0.0;
  bool jump = false;
  bool tie = false;
  MethodAggregate classical;
  std::vector<MethodAggregate> coupled;  // parallel to ExperimentConfig::qs
};

struct SweepResult {
  std::vector<int> qs;
  std::vector<SweepRow> rows;
  double error_classical = 0.0;           // sqrt(sum_i (m_exact - <m>)^2)
  std::vector<double> error_coupled;      // per q
  std::uint64_t wall_classical = 0;       // summed chain wall time
  std::vector<std::uint64_t> wall_coupled;
};

SweepResult run_sweep(const ExperimentConfig& config);

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct VerifyResult {
  std::vector<VerifyCheck> checks;
  bool all_pass = true;
  std::uint64_t wall_nanos = 0;
};

// Small-system battery: exact transition matrices of both samplers across
// N in {4,6,8,10}, q in {2, N/2} and the three reference coupling regimes,
// checked for stochasticity, detailed balance, the Gibbs stationary law,
// positive spectral gaps and the gap sandwich, plus the algebraic
// identities of the coupled construction.
VerifyResult run_verify(int threads = 0);

struct BenchChainReport {
  int q = 0;  // 0 = classical
  std::uint64_t n_steps = 0;
  std::uint64_t wall_nanos = 0;
  double coarse_acceptance = 0.0;
  std::uint64_t n_coarse_accepted = 0;
  std::uint64_t n_fine_steps = 0;
  std::uint64_t longrange_pair_evals = 0;
  std::uint64_t coarse_pair_evals = 0;
  double longrange_evals_per_iter = 0.0;
};

struct BenchResult {
  BenchChainReport classical;
  std::vector<BenchChainReport> coupled;  // parallel to ExperimentConfig::bench_qs
  bool fine_count_equals_n1 = true;
  double wall_ratio_8_over_4 = 0.0;  // 0 when either level is missing
};

// Cost benchmark with the tabulated long-range kernel: per-iteration pair
// evaluation counts, the n1 accounting, and the runtime-vs-q scaling.
// Chains run sequentially so wall times are comparable.
BenchResult run_bench(const ExperimentConfig& config);

// Subcommand entry points. Write files under config.out_dir; return the
// process exit code (0 ok, 1 validation error, 2 verification failure,
// 3 I/O error).
int cmd_exact_curve(const ExperimentConfig& config);
int cmd_sample(const ExperimentConfig& config);
int cmd_sweep(const ExperimentConfig& config);
int cmd_verify(const ExperimentConfig& config);
int cmd_bench(const ExperimentConfig& config);

}  // namespace cgmc
