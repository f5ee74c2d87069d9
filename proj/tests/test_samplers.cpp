#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "cgmc/samplers.hpp"

using namespace cgmc;

namespace {

ModelSpec mean_field_model(int n, double k, double j, double h) {
  ModelSpec m;
  m.lattice.n = n;
  m.short_range.strength = k;
  m.long_range = MeanFieldKernel{j};
  m.field = h;
  return m;
}

// Exact Gibbs distribution over all 2^n states, for small n.
std::vector<double> gibbs_distribution(const ModelSpec& m) {
  const int n = m.lattice.n;
  std::vector<double> w(1ULL << n);
  double zmax = -1e300;
  for (std::uint64_t bits = 0; bits < w.size(); ++bits) {
    w[bits] = -total_energy(SpinConfig::from_bits(n, bits), m);
    zmax = std::max(zmax, w[bits]);
  }
  double z = 0.0;
  for (auto& x : w) {
    x = std::exp(x - zmax);
    z += x;
  }
  for (auto& x : w) x /= z;
  return w;
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / 2.0;
}

// Empirical state distribution from a long chain.
std::vector<double> empirical_distribution(const ModelSpec& m, const SamplerConfig& cfg) {
  Rng rng(cfg.seed);
  SpinConfig sigma = make_initial(cfg, m, rng);
  const CompressedKernel ck = CompressedKernel::compress(m, cfg.kind == SamplerKind::Coupled ? cfg.q : 1);
  CoarseConfig eta;
  if (cfg.kind == SamplerKind::Coupled) {
    sigma.attach_cells(cfg.q);
    eta = project(sigma, cfg.q);
  }
  ChainStats stats;
  std::vector<double> counts(1ULL << m.lattice.n, 0.0);
  for (std::int64_t step = 0; step < cfg.n_steps; ++step) {
    if (cfg.kind == SamplerKind::Coupled)
      coupled_step(sigma, eta, m, ck, rng, stats, cfg.reconstruction);
    else
      classical_step(sigma, m, rng, stats);
    if (step >= cfg.burn_in) counts[sigma.to_bits()] += 1.0;
  }
  const double total = static_cast<double>(cfg.n_steps - cfg.burn_in);
  for (auto& c : counts) c /= total;
  return counts;
}

}  // namespace

TEST_CASE("flat target accepts every classical proposal") {
  const ModelSpec m = mean_field_model(16, 0.0, 0.0, 0.0);
  Rng rng(1);
  SpinConfig sigma(16);
  ChainStats stats;
  for (int i = 0; i < 1000; ++i) {
    const StepOutcome out = classical_step(sigma, m, rng, stats);
    CHECK(out.stage == StepStage::Accepted);
    CHECK(out.delta_fine == 0.0);
  }
  CHECK(stats.n_fine_accepted == 1000);
  CHECK(stats.overall_acceptance() == 1.0);
}

TEST_CASE("downhill first moves are always accepted") {
  const ModelSpec m = mean_field_model(12, 1.0, 2.0, 0.8);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    SpinConfig sigma(12);  // empty lattice, h > 0: any flip lowers the energy
    ChainStats stats;
    const StepOutcome out = classical_step(sigma, m, rng, stats);
    CHECK(out.stage == StepStage::Accepted);
    CHECK(out.delta_fine == doctest::Approx(-0.8).epsilon(1e-14));
  }
}

TEST_CASE("run_chain determinism") {
  const ModelSpec m = mean_field_model(32, 1.0, 2.0, -1.0);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::Coupled;
  cfg.q = 4;
  cfg.seed = 9001;
  cfg.n_steps = 20000;
  cfg.burn_in = 1000;
  cfg.record_series = true;

  const RunResult a = run_chain(cfg, m);
  const RunResult b = run_chain(cfg, m);
  CHECK(a.stats.n_proposed == b.stats.n_proposed);
  CHECK(a.stats.n_coarse_accepted == b.stats.n_coarse_accepted);
  CHECK(a.stats.n_fine_accepted == b.stats.n_fine_accepted);
  CHECK(a.stats.coverage_sum == b.stats.coverage_sum);
  CHECK(a.stats.coverage_sq_sum == b.stats.coverage_sq_sum);
  CHECK(a.stats.longrange_pair_evals == b.stats.longrange_pair_evals);
  CHECK(a.stats.coarse_pair_evals == b.stats.coarse_pair_evals);
  CHECK(a.mean_coverage == b.mean_coverage);
  CHECK(a.stderr_coverage == b.stderr_coverage);
  REQUIRE(a.series.size() == b.series.size());
  CHECK(a.series == b.series);

  SamplerConfig other = cfg;
  other.seed = 9002;
  const RunResult c = run_chain(other, m);
  CHECK(c.stats.coverage_sum != a.stats.coverage_sum);
}

TEST_CASE("independent-site chains reproduce the Bernoulli coverage") {
  for (double h : {0.0, 0.9, -1.4}) {
    const ModelSpec m = mean_field_model(64, 0.0, 0.0, h);
    SamplerConfig cfg;
    cfg.kind = SamplerKind::Classical;
    cfg.seed = 42 + static_cast<std::uint64_t>(h * 1000);
    cfg.n_steps = 100000;
    cfg.burn_in = 5000;

    const RunResult r = run_chain(cfg, m);
    const double expected = std::exp(h) / (1.0 + std::exp(h));
    REQUIRE(r.stderr_coverage > 0.0);
    CHECK(std::abs(r.mean_coverage - expected) <= 4.0 * r.stderr_coverage);
  }
}

TEST_CASE("coupled sampler with mean-field long range accepts every fine step") {
  const int n = 64, q = 8;
  const ModelSpec m = mean_field_model(n, 0.0, 5.0, -1.0);
  const CompressedKernel ck = CompressedKernel::compress(m, q);

  Rng rng(7);
  SpinConfig sigma = SpinConfig::random_fill(n, 0.5, rng);
  sigma.attach_cells(q);
  CoarseConfig eta = project(sigma, q);
  ChainStats stats;
  for (int step = 0; step < 100000; ++step) {
    const StepOutcome out = coupled_step(sigma, eta, m, ck, rng, stats);
    if (out.stage == StepStage::CoarseRejected) continue;
    // exact compression: the collapsed fine log-ratio vanishes
    CHECK(out.delta_fine - out.delta_coarse == 0.0);
    CHECK(out.stage == StepStage::Accepted);
  }
  CHECK(stats.n_fine_accepted == stats.n_coarse_accepted);
  CHECK(stats.n_fine_steps == stats.n_coarse_accepted);
  CHECK(stats.longrange_pair_evals == 0);  // mean-field fine path reuses the coarse delta

  SUBCASE("constant tabulated kernel: cancellation through the full fine path") {
    ModelSpec tab = m;
    tab.long_range = make_constant_kernel(n, 5.0 / n);
    const CompressedKernel ckt = CompressedKernel::compress(tab, q);
    Rng rng2(8);
    SpinConfig st = SpinConfig::random_fill(n, 0.5, rng2);
    st.attach_cells(q);
    CoarseConfig et = project(st, q);
    ChainStats stats2;
    for (int step = 0; step < 20000; ++step) {
      const StepOutcome out = coupled_step(st, et, tab, ckt, rng2, stats2);
      if (out.stage == StepStage::CoarseRejected) continue;
      CHECK(std::abs(out.delta_fine - out.delta_coarse) <= 1e-12);
    }
    CHECK(stats2.longrange_pair_evals > 0);
  }
}

TEST_CASE("boundary coarse proposals are rejected in place") {
  const int n = 16, q = 4;
  const ModelSpec m = mean_field_model(n, 0.0, 1.0, 50.0);  // strong field pins the full state
  const CompressedKernel ck = CompressedKernel::compress(m, q);
  Rng rng(3);
  SpinConfig sigma = SpinConfig::all_full(n);
  sigma.attach_cells(q);
  CoarseConfig eta = project(sigma, q);
  ChainStats stats;
  int coarse_rejected = 0;
  for (int step = 0; step < 2000; ++step) {
    const StepOutcome out = coupled_step(sigma, eta, m, ck, rng, stats);
    if (out.stage == StepStage::CoarseRejected) {
      ++coarse_rejected;
      CHECK(sigma.total() == n);  // state untouched
    }
  }
  // s=+1 on full cells is always infeasible: about half of all proposals
  CHECK(coarse_rejected > 500);
  CHECK(stats.n_coarse_accepted <= stats.n_proposed);
  CHECK(stats.n_fine_accepted <= stats.n_coarse_accepted);
}

TEST_CASE("small-system stationarity, both samplers") {
  const int n = 6;
  const ModelSpec m = mean_field_model(n, 1.0, 1.0, -1.1);
  const std::vector<double> exact = gibbs_distribution(m);

  SamplerConfig cfg;
  cfg.seed = 2024;
  cfg.n_steps = 2000000;
  cfg.burn_in = 10000;

  SUBCASE("classical") {
    cfg.kind = SamplerKind::Classical;
    CHECK(tv_distance(empirical_distribution(m, cfg), exact) <= 0.01);
  }
  SUBCASE("coupled q=2") {
    cfg.kind = SamplerKind::Coupled;
    cfg.q = 2;
    CHECK(tv_distance(empirical_distribution(m, cfg), exact) <= 0.01);
  }
  SUBCASE("coupled q=3") {
    cfg.kind = SamplerKind::Coupled;
    cfg.q = 3;
    CHECK(tv_distance(empirical_distribution(m, cfg), exact) <= 0.01);
  }
  SUBCASE("coupled q=1, single-site cells") {
    cfg.kind = SamplerKind::Coupled;
    cfg.q = 1;
    CHECK(tv_distance(empirical_distribution(m, cfg), exact) <= 0.01);
  }
  SUBCASE("coupled q=N, one coarse cell") {
    cfg.kind = SamplerKind::Coupled;
    cfg.q = n;
    CHECK(tv_distance(empirical_distribution(m, cfg), exact) <= 0.01);
  }
  SUBCASE("coupled full-cell reconstruction") {
    cfg.kind = SamplerKind::Coupled;
    cfg.q = 3;
    cfg.reconstruction = ReconstructionMode::FullCell;
    CHECK(tv_distance(empirical_distribution(m, cfg), exact) <= 0.01);
  }
}

TEST_CASE("batch-means standard errors are calibrated") {
  // spread of independent replicate means vs the reported stderr
  const ModelSpec m = mean_field_model(48, 0.8, 1.5, -1.0);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::Coupled;
  cfg.q = 4;
  cfg.n_steps = 40000;
  cfg.burn_in = 4000;

  const int reps = 16;
  std::vector<double> means;
  double se_sum = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    cfg.seed = 7000 + static_cast<std::uint64_t>(rep);
    const RunResult r = run_chain(cfg, m);
    means.push_back(r.mean_coverage);
    se_sum += r.stderr_coverage;
  }
  double mean = 0.0;
  for (double v : means) mean += v;
  mean /= reps;
  double var = 0.0;
  for (double v : means) var += (v - mean) * (v - mean);
  const double spread = std::sqrt(var / (reps - 1));
  const double reported = se_sum / reps;
  CHECK(reported > 0.0);
  CHECK(spread / reported > 0.4);
  CHECK(spread / reported < 2.5);
}

TEST_CASE("sampler configuration validation") {
  const ModelSpec m = mean_field_model(8, 0.0, 0.0, 0.0);
  SamplerConfig cfg;
  cfg.n_steps = 0;
  CHECK_THROWS_AS(cfg.validate(m), ConfigError);
  cfg.n_steps = 100;
  cfg.burn_in = 100;
  CHECK_THROWS_AS(cfg.validate(m), ConfigError);
  cfg.burn_in = 10;
  cfg.thinning = 0;
  CHECK_THROWS_AS(cfg.validate(m), ConfigError);
  cfg.thinning = 1;
  cfg.kind = SamplerKind::Coupled;
  cfg.q = 5;
  CHECK_THROWS_AS(cfg.validate(m), ConfigError);
  cfg.q = 4;
  CHECK_NOTHROW(cfg.validate(m));
}
