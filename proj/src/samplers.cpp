#include "cgmc/samplers.hpp"

#include <chrono>

namespace cgmc {

namespace {

// Short-range + field part of a single-site flip, used on the mean-field
// fast path where the long-range delta is repaid by the coarse delta.
double flip_delta_short_field(const SpinConfig& sigma, int site, const ModelSpec& model) {
  const int n = sigma.n();
  const double dsigma = sigma.occupied(site) ? -1.0 : +1.0;
  double nb;
  if (n == 2) {
    nb = sigma.occupied(1 - site) ? 1.0 : 0.0;
  } else {
    nb = (sigma.occupied((site + n - 1) % n) ? 1.0 : 0.0) +
         (sigma.occupied((site + 1) % n) ? 1.0 : 0.0);
  }
  return -dsigma * (model.short_range.strength * nb + model.field);
}

}  // namespace

void SamplerConfig::validate(const ModelSpec& model) const {
  if (n_steps < 1) throw ConfigError("sampler needs n_steps >= 1");
  if (burn_in < 0 || burn_in >= n_steps) throw ConfigError("burn_in must lie in [0, n_steps)");
  if (thinning < 1) throw ConfigError("thinning must be >= 1");
  if (init == InitMode::Bernoulli && (init_density < 0.0 || init_density > 1.0))
    throw ConfigError("initial density must lie in [0, 1]");
  if (kind == SamplerKind::Coupled && (q < 1 || model.lattice.n % q != 0))
    throw ConfigError("coupled sampler: q=" + std::to_string(q) + " must divide n=" +
                      std::to_string(model.lattice.n));
}

ChainStats& ChainStats::operator+=(const ChainStats& o) {
  n_proposed += o.n_proposed;
  n_coarse_accepted += o.n_coarse_accepted;
  n_fine_accepted += o.n_fine_accepted;
  n_fine_steps += o.n_fine_steps;
  n_samples += o.n_samples;
  coverage_sum += o.coverage_sum;
  coverage_sq_sum += o.coverage_sq_sum;
  longrange_pair_evals += o.longrange_pair_evals;
  coarse_pair_evals += o.coarse_pair_evals;
  wall_nanos += o.wall_nanos;
  return *this;
}

StepOutcome classical_step(SpinConfig& sigma, const ModelSpec& model, Rng& rng, ChainStats& stats) {
  const int site = rng.index_below(sigma.n());
  const double delta = flip_delta(sigma, site, model);

  ++stats.n_proposed;
  ++stats.n_coarse_accepted;
  ++stats.n_fine_steps;
  stats.longrange_pair_evals += static_cast<std::uint64_t>(model.long_eval_cost());

  StepOutcome out;
  out.delta_fine = delta;
  if (metropolis_accept(-delta, rng)) {
    sigma.flip(site);
    ++stats.n_fine_accepted;
    out.stage = StepStage::Accepted;
    out.flipped_site = site;
  } else {
    out.stage = StepStage::FineRejected;
  }
  return out;
}

StepOutcome coupled_step(SpinConfig& sigma, CoarseConfig& eta, const ModelSpec& model,
                         const CompressedKernel& ck, Rng& rng, ChainStats& stats,
                         ReconstructionMode mode) {
  const int m = ck.m();
  const int q = ck.q();
  ++stats.n_proposed;

  const int cell = rng.index_below(m);
  const int sign = rng.spin_sign();

  StepOutcome out;
  const auto dbar = ck.coarse_delta(eta, cell, sign);
  if (!dbar) {
    // boundary move: proposed and rejected, keeping the proposal symmetric
    out.stage = StepStage::CoarseRejected;
    return out;
  }
  stats.coarse_pair_evals += static_cast<std::uint64_t>(m);
  out.delta_coarse = *dbar;

  const double prior = *ck.prior_logratio(eta, cell, sign);
  if (!metropolis_accept(-*dbar + prior, rng)) {
    out.stage = StepStage::CoarseRejected;
    return out;
  }
  ++stats.n_coarse_accepted;
  ++stats.n_fine_steps;

  if (mode == ReconstructionMode::SingleSite) {
    const Reconstruction rec = reconstruct_cell(sigma, cell, sign, q, ck.binomial(), rng);
    contract_check(prior + rec.log_fr_ratio == 0.0,
                   "reconstruction ratio must cancel the coarse prior ratio");
    double residual;  // delta(beta H) - delta(Hbar), the collapsed fine log-ratio
    if (model.long_is_mean_field()) {
      residual = flip_delta_short_field(sigma, rec.site, model) + ck.hbar() * sign;
      out.delta_fine = residual + *dbar;
    } else {
      out.delta_fine = flip_delta(sigma, rec.site, model);
      stats.longrange_pair_evals += static_cast<std::uint64_t>(model.long_eval_cost());
      residual = out.delta_fine - *dbar;
    }
    if (metropolis_accept(-residual, rng)) {
      sigma.flip(rec.site);
      eta.eta[static_cast<std::size_t>(cell)] += sign;
      eta.total += sign;
      ++stats.n_fine_accepted;
      out.stage = StepStage::Accepted;
      out.flipped_site = rec.site;
    } else {
      out.stage = StepStage::FineRejected;
    }
    return out;
  }

  // Full-cell resampling (cross-validation mode). The microscopic delta is
  // path-summed over the toggled sites.
  const CellResample rs = reconstruct_cell_full(sigma, cell, sign, q, ck.binomial(), rng);
  double dfine = 0.0;
  for (int site : rs.sites) {
    dfine += flip_delta(sigma, site, model);
    sigma.flip(site);
    stats.longrange_pair_evals += static_cast<std::uint64_t>(model.long_eval_cost());
  }
  out.delta_fine = dfine;
  if (metropolis_accept(-(dfine - *dbar), rng)) {
    eta.eta[static_cast<std::size_t>(cell)] += sign;
    eta.total += sign;
    ++stats.n_fine_accepted;
    out.stage = StepStage::Accepted;
    out.flipped_site = rs.sites.empty() ? std::optional<int>{} : std::optional<int>{rs.sites.front()};
  } else {
    for (auto it = rs.sites.rbegin(); it != rs.sites.rend(); ++it) sigma.flip(*it);
    out.stage = StepStage::FineRejected;
  }
  return out;
}

SpinConfig make_initial(const SamplerConfig& config, const ModelSpec& model, Rng& rng) {
  switch (config.init) {
    case InitMode::AllEmpty:
      return SpinConfig::all_empty(model.lattice.n);
    case InitMode::AllFull:
      return SpinConfig::all_full(model.lattice.n);
    case InitMode::Bernoulli:
    default:
      return SpinConfig::random_fill(model.lattice.n, config.init_density, rng);
  }
}

namespace {

constexpr std::uint64_t kRevalidateEvery = 1u << 16;

struct BatchAccumulator {
  explicit BatchAccumulator(std::int64_t expected_samples) {
    n_batches = static_cast<int>(std::min<std::int64_t>(32, std::max<std::int64_t>(expected_samples, 1)));
    batch_size = std::max<std::int64_t>(expected_samples / n_batches, 1);
    sums.assign(static_cast<std::size_t>(n_batches), 0.0);
  }

  void add(std::int64_t index, double value) {
    const std::int64_t b = index / batch_size;
    if (b < n_batches) sums[static_cast<std::size_t>(b)] += value;
  }

  double stderr_of_mean() const {
    if (n_batches < 2) return 0.0;
    double mean = 0.0;
    for (double s : sums) mean += s;
    mean /= static_cast<double>(n_batches) * static_cast<double>(batch_size);
    double var = 0.0;
    for (double s : sums) {
      const double d = s / static_cast<double>(batch_size) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n_batches - 1);
    return std::sqrt(var / static_cast<double>(n_batches));
  }

  int n_batches = 0;
  std::int64_t batch_size = 1;
  std::vector<double> sums;
};

}  // namespace

RunResult run_chain(const SamplerConfig& config, const ModelSpec& model, SpinConfig initial) {
  model.validate();
  config.validate(model);
  contract_check(initial.n() == model.lattice.n, "run_chain: initial state size mismatch");

  Rng rng(config.seed);
  RunResult result;
  ChainStats& stats = result.stats;

  const std::int64_t expected_samples =
      (config.n_steps - config.burn_in - 1) / config.thinning + 1;
  BatchAccumulator batches(expected_samples);
  if (config.record_series) result.series.reserve(static_cast<std::size_t>(expected_samples));

  const bool coupled = config.kind == SamplerKind::Coupled;
  CompressedKernel ck = CompressedKernel::compress(model, coupled ? config.q : 1);
  CoarseConfig eta;
  if (coupled) {
    initial.attach_cells(config.q);
    eta = project(initial, config.q);
  }

  std::uint64_t accepted_since_check = 0;
  std::int64_t sample_index = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::int64_t step = 0; step < config.n_steps; ++step) {
    StepOutcome out = coupled ? coupled_step(initial, eta, model, ck, rng, stats, config.reconstruction)
                              : classical_step(initial, model, rng, stats);
    if (out.stage == StepStage::Accepted && ++accepted_since_check >= kRevalidateEvery) {
      accepted_since_check = 0;
      initial.check_caches();
      if (coupled) {
        const CoarseConfig fresh = project(initial, config.q);
        contract_check(fresh.eta == eta.eta && fresh.total == eta.total,
                       "coupled chain: coarse state desynchronised from sigma");
      }
    }
    if (step >= config.burn_in && (step - config.burn_in) % config.thinning == 0) {
      const double cov = initial.coverage();
      stats.coverage_sum += cov;
      stats.coverage_sq_sum += cov * cov;
      ++stats.n_samples;
      batches.add(sample_index++, cov);
      if (config.record_series) result.series.push_back(cov);
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  stats.wall_nanos = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());

  result.mean_coverage = stats.n_samples ? stats.coverage_sum / static_cast<double>(stats.n_samples) : 0.0;
  result.stderr_coverage = batches.stderr_of_mean();
  result.n_batches = batches.n_batches;
  return result;
}

RunResult run_chain(const SamplerConfig& config, const ModelSpec& model) {
  model.validate();
  config.validate(model);
  Rng init_rng(stable_hash({config.seed, 0x696e6974ULL}));
  return run_chain(config, model, make_initial(config, model, init_rng));
}

}  // namespace cgmc
