#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cgmc/coarse_graining.hpp"

namespace cgmc {

enum class SamplerKind { Classical, Coupled };
enum class InitMode { AllEmpty, AllFull, Bernoulli };
enum class ReconstructionMode { SingleSite, FullCell };

struct SamplerConfig {
  SamplerKind kind = SamplerKind::Classical;
  int q = 1;  // coarse level, Coupled only
  std::uint64_t seed = 0;
  std::int64_t n_steps = 0;
  std::int64_t burn_in = 0;
  std::int64_t thinning = 1;
  bool record_series = false;
  InitMode init = InitMode::Bernoulli;
  double init_density = 0.5;
  ReconstructionMode reconstruction = ReconstructionMode::SingleSite;

  void validate(const ModelSpec& model) const;
};

enum class StepStage { CoarseRejected, FineRejected, Accepted };

struct StepOutcome {
  StepStage stage = StepStage::FineRejected;
  double delta_fine = 0.0;    // microscopic beta*H change of the proposal
  double delta_coarse = 0.0;  // coarse Hamiltonian change (Coupled only)
  std::optional<int> flipped_site;
};

// Counters merge by addition across replicate chains. For the classical
// sampler every proposal reaches the fine stage, so n_coarse_accepted and
// n_fine_steps simply track n_proposed there.
struct ChainStats {
  std::uint64_t n_proposed = 0;
  std::uint64_t n_coarse_accepted = 0;  // n1 in the cost accounting
  std::uint64_t n_fine_accepted = 0;
  std::uint64_t n_fine_steps = 0;  // times the fine accept-reject ran
  std::uint64_t n_samples = 0;
  double coverage_sum = 0.0;
  double coverage_sq_sum = 0.0;
  std::uint64_t longrange_pair_evals = 0;
  std::uint64_t coarse_pair_evals = 0;
  std::uint64_t wall_nanos = 0;

  double coarse_acceptance() const {
    return n_proposed ? static_cast<double>(n_coarse_accepted) / static_cast<double>(n_proposed) : 0.0;
  }
  double fine_given_coarse_acceptance() const {
    return n_coarse_accepted ? static_cast<double>(n_fine_accepted) / static_cast<double>(n_coarse_accepted) : 0.0;
  }
  double overall_acceptance() const {
    return n_proposed ? static_cast<double>(n_fine_accepted) / static_cast<double>(n_proposed) : 0.0;
  }

  ChainStats& operator+=(const ChainStats& o);
};

struct RunResult {
  ChainStats stats;
  double mean_coverage = 0.0;
  double stderr_coverage = 0.0;  // batch means, up to 32 batches
  int n_batches = 0;
  std::vector<double> series;  // thinned coverage samples when recorded
};

// Uniform variate against exp(log_ratio), log-ratio clamped to +-700 so the
// exponential never overflows. log_ratio = 0 accepts with probability one.
inline bool metropolis_accept(double log_ratio, Rng& rng) {
  const double a = std::exp(std::clamp(log_ratio, -700.0, 700.0));
  return rng.uniform01() < a;
}

// One single-spin-flip Metropolis step: site uniform in [0,N), accept with
// min{1, exp(-delta)}.
StepOutcome classical_step(SpinConfig& sigma, const ModelSpec& model, Rng& rng, ChainStats& stats);

// One coupled step: coarse move (cell k uniform, sign +-1 uniform) filtered
// by the compressed Hamiltonian, then reconstruction and the exact fine
// accept-reject. eta must equal project(sigma, q) on entry; both are updated
// on acceptance. A first-stage rejection consumes the iteration with the
// state unchanged.
StepOutcome coupled_step(SpinConfig& sigma, CoarseConfig& eta, const ModelSpec& model,
                         const CompressedKernel& ck, Rng& rng, ChainStats& stats,
                         ReconstructionMode mode = ReconstructionMode::SingleSite);

SpinConfig make_initial(const SamplerConfig& config, const ModelSpec& model, Rng& rng);

// Full chain driver: builds the compressed kernel once (Coupled), runs
// n_steps iterations, accumulates thinned coverage after burn-in, and
// reports mean and batch-means standard error. Deterministic given the seed
// (wall_nanos excepted).
RunResult run_chain(const SamplerConfig& config, const ModelSpec& model);
RunResult run_chain(const SamplerConfig& config, const ModelSpec& model, SpinConfig initial);

}  // namespace cgmc
