#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>

#include "cgmc/lattice_model.hpp"

using namespace cgmc;

namespace {

// Independent energy oracle: ordered double sum over all pairs with
// minimal-image distances, halved. Deliberately ignores every cache and
// closed form the library uses.
double brute_energy(const SpinConfig& s, const ModelSpec& m) {
  const int n = s.n();
  double acc = 0.0;
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (y == x || !s.occupied(x) || !s.occupied(y)) continue;
      const int d = std::min(std::abs(x - y), n - std::abs(x - y));
      double w = m.long_pair_weight(d);
      if (d == 1) w += m.short_range.strength;
      acc += w;
    }
  }
  return -acc / 2.0 - m.field * static_cast<double>(s.total());
}

ModelSpec mean_field_model(int n, double k, double j, double h) {
  ModelSpec m;
  m.lattice.n = n;
  m.short_range.strength = k;
  m.long_range = MeanFieldKernel{j};
  m.field = h;
  return m;
}

ModelSpec tabulated_model(int n, double k, const TabulatedKernel& tab, double h) {
  ModelSpec m;
  m.lattice.n = n;
  m.short_range.strength = k;
  m.long_range = tab;
  m.field = h;
  return m;
}

TabulatedKernel random_kernel(int n, int range, Rng& rng) {
  TabulatedKernel tab;
  tab.range = range;
  tab.value.assign(static_cast<std::size_t>(n / 2) + 1, 0.0);
  for (int d = 1; d <= range; ++d) tab.value[static_cast<std::size_t>(d)] = 2.0 * rng.uniform01() - 1.0;
  return tab;
}

SpinConfig random_config(int n, Rng& rng) {
  SpinConfig s(n);
  for (int x = 0; x < n; ++x)
    if (rng.bernoulli(0.5)) s.flip(x);
  return s;
}

}  // namespace

TEST_CASE("total energy matches hand values") {
  const ModelSpec m = mean_field_model(4, 1.0, 2.0, 0.0);

  SpinConfig zeros(4);
  CHECK(total_energy(zeros, m) == 0.0);

  SpinConfig ones = SpinConfig::all_full(4);
  // 4 bonds * K + 6 pairs * J/4
  CHECK(total_energy(ones, m) == doctest::Approx(-7.0).epsilon(1e-14));

  const ModelSpec m8 = mean_field_model(8, 1.0, 2.0, 0.7);
  SpinConfig single(8);
  single.flip(3);
  CHECK(total_energy(single, m8) == doctest::Approx(-0.7).epsilon(1e-14));
}

TEST_CASE("total energy agrees with the brute-force double sum") {
  Rng rng(11);
  for (int n : {2, 3, 4, 5, 8, 16, 17}) {
    const ModelSpec mf = mean_field_model(n, 0.8, -1.3, 0.4);
    const ModelSpec tb = tabulated_model(n, -0.5, random_kernel(n, n / 2, rng), -0.2);
    for (int rep = 0; rep < 20; ++rep) {
      const SpinConfig s = random_config(n, rng);
      CHECK(total_energy(s, mf) == doctest::Approx(brute_energy(s, mf)).epsilon(1e-12));
      CHECK(total_energy(s, tb) == doctest::Approx(brute_energy(s, tb)).epsilon(1e-12));
    }
  }
}

TEST_CASE("flip delta hand values") {
  const ModelSpec m = mean_field_model(4, 1.0, 2.0, 0.0);
  SpinConfig ones = SpinConfig::all_full(4);
  CHECK(flip_delta(ones, 0, m) == doctest::Approx(3.5).epsilon(1e-14));

  const ModelSpec mh = mean_field_model(8, 1.0, 2.0, 0.7);
  SpinConfig zeros(8);
  for (int x = 0; x < 8; ++x) CHECK(flip_delta(zeros, x, mh) == doctest::Approx(-0.7).epsilon(1e-14));
}

TEST_CASE("flip delta equals total-energy difference (property)") {
  Rng rng(202);
  const int n = 64;
  const ModelSpec mf = mean_field_model(n, 1.0, 5.0, -2.5);
  const ModelSpec tb = tabulated_model(n, 1.0, random_kernel(n, 10, rng), 0.3);
  const ModelSpec tb_full = tabulated_model(n, 0.3, random_kernel(n, n / 2, rng), -1.0);

  for (const ModelSpec& m : {mf, tb, tb_full}) {
    for (int rep = 0; rep < 1000; ++rep) {
      SpinConfig s = random_config(n, rng);
      const int site = rng.index_below(n);
      const double before = total_energy(s, m);
      const double delta = flip_delta(s, site, m);
      s.flip(site);
      const double after = total_energy(s, m);
      CHECK(std::abs(delta - (after - before)) <= 1e-10);
      // reversibility
      CHECK(std::abs(flip_delta(s, site, m) + delta) <= 1e-12);
    }
  }
}

TEST_CASE("apply_flip maintains caches over long random walks") {
  Rng rng(77);
  const int n = 48;
  SpinConfig s = random_config(n, rng);
  s.attach_cells(8);
  for (int rep = 0; rep < 10000; ++rep) s.flip(rng.index_below(n));
  CHECK_NOTHROW(s.check_caches());

  const CoarseConfig eta = project(s, 8);
  int total = 0;
  for (int k = 0; k < eta.m(); ++k) {
    CHECK(eta.eta[static_cast<std::size_t>(k)] == s.cell_sum(k));
    total += eta.eta[static_cast<std::size_t>(k)];
  }
  CHECK(total == s.total());

  SUBCASE("flip twice restores the state") {
    const std::uint64_t before = s.to_bits();
    s.flip(13);
    s.flip(13);
    CHECK(s.to_bits() == before);
  }
}

TEST_CASE("coverage") {
  SpinConfig s(8);
  CHECK(s.coverage() == 0.0);
  for (int x : {1, 4, 6}) s.flip(x);
  CHECK(s.coverage() == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(SpinConfig::all_full(8).coverage() == 1.0);
}

TEST_CASE("projection") {
  SpinConfig ones = SpinConfig::all_full(8);
  const CoarseConfig c = project(ones, 4);
  REQUIRE(c.m() == 2);
  CHECK(c.eta[0] == 4);
  CHECK(c.eta[1] == 4);

  // sigma = 10110100, site 0 leftmost
  SpinConfig s(8);
  for (int x : {0, 2, 3, 5}) s.flip(x);
  const CoarseConfig c2 = project(s, 4);
  CHECK(c2.eta[0] == 3);
  CHECK(c2.eta[1] == 1);

  const CoarseConfig c1 = project(s, 1);
  for (int x = 0; x < 8; ++x) CHECK(c1.eta[static_cast<std::size_t>(x)] == (s.occupied(x) ? 1 : 0));
}

TEST_CASE("mean-field kernel equals a constant tabulated kernel") {
  Rng rng(5);
  const int n = 16;
  const double j = 1.7;
  const ModelSpec mf = mean_field_model(n, 0.6, j, -0.4);
  const ModelSpec tb = tabulated_model(n, 0.6, make_constant_kernel(n, j / n), -0.4);
  for (int rep = 0; rep < 50; ++rep) {
    const SpinConfig s = random_config(n, rng);
    CHECK(total_energy(s, mf) == doctest::Approx(total_energy(s, tb)).epsilon(1e-10));
  }
}

TEST_CASE("independent-site limit: energy reduces to the field term") {
  // With K=J=0 the Gibbs weights factorise; site marginals are
  // Bernoulli(e^h / (1 + e^h)). Checked against direct enumeration.
  const int n = 12;
  const double h = 0.8;
  const ModelSpec m = mean_field_model(n, 0.0, 0.0, h);

  double z = 0.0, cov = 0.0;
  for (std::uint64_t bits = 0; bits < (1ULL << n); ++bits) {
    const SpinConfig s = SpinConfig::from_bits(n, bits);
    CHECK(total_energy(s, m) == doctest::Approx(-h * s.total()).epsilon(1e-13));
    const double w = std::exp(-total_energy(s, m));
    z += w;
    cov += w * s.coverage();
  }
  const double expected = std::exp(h) / (1.0 + std::exp(h));
  CHECK(cov / z == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("contract and configuration errors") {
  const ModelSpec m = mean_field_model(8, 1.0, 1.0, 0.0);
  SpinConfig s(8);
  CHECK_THROWS_AS(flip_delta(s, -1, m), ContractError);
  CHECK_THROWS_AS(flip_delta(s, 8, m), ContractError);
  CHECK_THROWS_AS(s.flip(9), ContractError);

  SpinConfig wrong(6);
  CHECK_THROWS_AS(total_energy(wrong, m), ContractError);

  CHECK_THROWS_AS(project(s, 3), ConfigError);
  CHECK_THROWS_AS(s.attach_cells(5), ConfigError);
  CHECK_THROWS_AS(SpinConfig(1), ConfigError);

  ModelSpec bad = m;
  bad.long_range = TabulatedKernel{{0.0, 1.0}, 1};  // wrong table length
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
