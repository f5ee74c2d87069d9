#include "cgmc/lattice_model.hpp"

#include <algorithm>
#include <cmath>

namespace cgmc {

TabulatedKernel make_triangle_kernel(int n, int range, double strength) {
  if (n < 2) throw ConfigError("triangle kernel: n must be >= 2");
  const int dmax = n / 2;
  if (range < 1 || range > dmax)
    throw ConfigError("triangle kernel: range must be in [1, n/2], got " + std::to_string(range));
  TabulatedKernel k;
  k.range = range;
  k.value.assign(static_cast<std::size_t>(dmax) + 1, 0.0);
  const double l = static_cast<double>(range);
  for (int d = 1; d <= range; ++d)
    k.value[static_cast<std::size_t>(d)] = strength / l * (1.0 - static_cast<double>(d) / l);
  return k;
}

TabulatedKernel make_constant_kernel(int n, double pair_weight) {
  if (n < 2) throw ConfigError("constant kernel: n must be >= 2");
  const int dmax = n / 2;
  TabulatedKernel k;
  k.range = dmax;
  k.value.assign(static_cast<std::size_t>(dmax) + 1, pair_weight);
  k.value[0] = 0.0;
  return k;
}

double ModelSpec::long_pair_weight(int dist) const {
  if (const auto* mf = std::get_if<MeanFieldKernel>(&long_range))
    return dist > 0 ? mf->strength / static_cast<double>(lattice.n) : 0.0;
  const auto& tab = std::get<TabulatedKernel>(long_range);
  if (dist < 1 || dist > tab.range || dist >= static_cast<int>(tab.value.size())) return 0.0;
  return tab.value[static_cast<std::size_t>(dist)];
}

std::int64_t ModelSpec::long_eval_cost() const {
  if (long_is_mean_field()) return 1;
  const auto& tab = std::get<TabulatedKernel>(long_range);
  const int dmax = lattice.n / 2;
  const int reach = std::min(tab.range, dmax);
  std::int64_t cost = 0;
  for (int d = 1; d <= reach; ++d) cost += (2 * d == lattice.n) ? 1 : 2;
  return cost;
}

void ModelSpec::validate() const {
  lattice.validate();
  if (const auto* tab = std::get_if<TabulatedKernel>(&long_range)) {
    const int dmax = lattice.n / 2;
    if (tab->range < 0 || tab->range > dmax)
      throw ConfigError("tabulated kernel range must be in [0, n/2]");
    if (static_cast<int>(tab->value.size()) != dmax + 1)
      throw ConfigError("tabulated kernel must hold one value per distance 1..n/2");
    for (int d = tab->range + 1; d <= dmax; ++d)
      if (tab->value[static_cast<std::size_t>(d)] != 0.0)
        throw ConfigError("tabulated kernel has nonzero value beyond its range");
  }
  if (!std::isfinite(field) || !std::isfinite(short_range.strength))
    throw ConfigError("model couplings must be finite");
}

SpinConfig::SpinConfig(int n) {
  if (n < 2) throw ConfigError("spin configuration needs n >= 2");
  occ_.assign(static_cast<std::size_t>(n), 0);
}

SpinConfig SpinConfig::all_full(int n) {
  SpinConfig s(n);
  std::fill(s.occ_.begin(), s.occ_.end(), std::uint8_t{1});
  s.total_ = n;
  return s;
}

SpinConfig SpinConfig::random_fill(int n, double density, Rng& rng) {
  SpinConfig s(n);
  for (int x = 0; x < n; ++x) {
    if (rng.bernoulli(density)) {
      s.occ_[static_cast<std::size_t>(x)] = 1;
      ++s.total_;
    }
  }
  return s;
}

SpinConfig SpinConfig::from_bits(int n, std::uint64_t bits) {
  contract_check(n >= 2 && n <= 63, "from_bits supports 2 <= n <= 63");
  SpinConfig s(n);
  for (int x = 0; x < n; ++x) {
    if ((bits >> x) & 1u) {
      s.occ_[static_cast<std::size_t>(x)] = 1;
      ++s.total_;
    }
  }
  return s;
}

std::uint64_t SpinConfig::to_bits() const {
  contract_check(n() <= 63, "to_bits supports n <= 63");
  std::uint64_t bits = 0;
  for (int x = 0; x < n(); ++x)
    if (occ_[static_cast<std::size_t>(x)]) bits |= (1ULL << x);
  return bits;
}

void SpinConfig::attach_cells(int q) {
  if (q < 1 || n() % q != 0)
    throw ConfigError("coarse level q=" + std::to_string(q) + " must divide n=" + std::to_string(n()));
  q_ = q;
  const int m = n() / q;
  cell_sums_.assign(static_cast<std::size_t>(m), 0);
  for (int x = 0; x < n(); ++x)
    cell_sums_[static_cast<std::size_t>(x / q)] += occ_[static_cast<std::size_t>(x)];
}

void SpinConfig::flip(int site) {
  contract_check(site >= 0 && site < n(), "flip: site index out of range");
  auto& bit = occ_[static_cast<std::size_t>(site)];
  const int delta = bit ? -1 : +1;
  bit ^= 1u;
  total_ += delta;
  if (q_ > 0) cell_sums_[static_cast<std::size_t>(site / q_)] += delta;
}

void SpinConfig::check_caches() const {
  int sum = 0;
  for (auto b : occ_) sum += b;
  contract_check(sum == total_, "cache drift: particle total");
  if (q_ > 0) {
    int acc = 0;
    for (int k = 0; k < cell_count(); ++k) {
      int cell = 0;
      for (int x = k * q_; x < (k + 1) * q_; ++x) cell += occ_[static_cast<std::size_t>(x)];
      contract_check(cell == cell_sums_[static_cast<std::size_t>(k)], "cache drift: cell sum");
      contract_check(cell >= 0 && cell <= q_, "cell sum out of [0, q]");
      acc += cell;
    }
    contract_check(acc == total_, "cell sums do not add up to the total");
  }
}

void CoarseConfig::validate() const {
  int sum = 0;
  for (int v : eta) {
    contract_check(v >= 0 && v <= q, "coarse occupancy out of [0, q]");
    sum += v;
  }
  contract_check(sum == total, "coarse total cache mismatch");
}

namespace {

// Short-range bond sum: unordered pairs at periodic distance 1. N=2 has a
// single bond.
double nn_pair_sum(const SpinConfig& s) {
  const int n = s.n();
  const int bonds = (n == 2) ? 1 : n;
  double acc = 0.0;
  for (int x = 0; x < bonds; ++x) {
    const int y = (x + 1) % n;
    if (s.occupied(x) && s.occupied(y)) acc += 1.0;
  }
  return acc;
}

}  // namespace

double total_energy(const SpinConfig& sigma, const ModelSpec& model) {
  contract_check(sigma.n() == model.lattice.n, "total_energy: configuration/model size mismatch");
  const int n = sigma.n();
  double energy = -model.short_range.strength * nn_pair_sum(sigma);

  if (model.long_is_mean_field()) {
    const double jn = std::get<MeanFieldKernel>(model.long_range).strength / n;
    const double s = static_cast<double>(sigma.total());
    energy -= jn * s * (s - 1.0) / 2.0;
  } else {
    const auto& tab = std::get<TabulatedKernel>(model.long_range);
    const int dmax = n / 2;
    const int reach = std::min(tab.range, dmax);
    for (int d = 1; d <= reach; ++d) {
      const double w = tab.value[static_cast<std::size_t>(d)];
      if (w == 0.0) continue;
      // each unordered pair once; at d = N/2 the ring pairs coincide
      const int span = (2 * d == n) ? n / 2 : n;
      double pairs = 0.0;
      for (int x = 0; x < span; ++x)
        if (sigma.occupied(x) && sigma.occupied((x + d) % n)) pairs += 1.0;
      energy -= w * pairs;
    }
  }

  energy -= model.field * static_cast<double>(sigma.total());
  return energy;
}

double flip_delta(const SpinConfig& sigma, int site, const ModelSpec& model) {
  contract_check(site >= 0 && site < sigma.n(), "flip_delta: site index out of range");
  contract_check(sigma.n() == model.lattice.n, "flip_delta: configuration/model size mismatch");
  const int n = sigma.n();
  const double dsigma = sigma.occupied(site) ? -1.0 : +1.0;

  double neighbor_occ;
  if (n == 2) {
    neighbor_occ = sigma.occupied(1 - site) ? 1.0 : 0.0;
  } else {
    const int left = (site + n - 1) % n;
    const int right = (site + 1) % n;
    neighbor_occ = (sigma.occupied(left) ? 1.0 : 0.0) + (sigma.occupied(right) ? 1.0 : 0.0);
  }
  double delta = -dsigma * model.short_range.strength * neighbor_occ;

  if (model.long_is_mean_field()) {
    const double jn = std::get<MeanFieldKernel>(model.long_range).strength / n;
    const double others = static_cast<double>(sigma.total() - (sigma.occupied(site) ? 1 : 0));
    delta -= dsigma * jn * others;
  } else {
    const auto& tab = std::get<TabulatedKernel>(model.long_range);
    const int reach = std::min(tab.range, n / 2);
    const bool ring_midpoint = 2 * reach == n;
    const int paired = ring_midpoint ? reach - 1 : reach;
    double coupled = 0.0;
    // wrap indices by hand; a modulo per term dominates the O(L) loop
    int up = site, down = site;
    for (int d = 1; d <= paired; ++d) {
      up = (up + 1 == n) ? 0 : up + 1;
      down = (down == 0) ? n - 1 : down - 1;
      coupled += tab.value[static_cast<std::size_t>(d)] *
                 ((sigma.occupied(up) ? 1.0 : 0.0) + (sigma.occupied(down) ? 1.0 : 0.0));
    }
    if (ring_midpoint) {
      const int opposite = site + reach < n ? site + reach : site + reach - n;
      coupled += tab.value[static_cast<std::size_t>(reach)] * (sigma.occupied(opposite) ? 1.0 : 0.0);
    }
    delta -= dsigma * coupled;
  }

  delta -= dsigma * model.field;
  return delta;
}

CoarseConfig project(const SpinConfig& sigma, int q) {
  if (q < 1 || sigma.n() % q != 0)
    throw ConfigError("project: q=" + std::to_string(q) + " must divide n=" + std::to_string(sigma.n()));
  CoarseConfig c;
  c.q = q;
  const int m = sigma.n() / q;
  c.eta.assign(static_cast<std::size_t>(m), 0);
  for (int x = 0; x < sigma.n(); ++x)
    if (sigma.occupied(x)) ++c.eta[static_cast<std::size_t>(x / q)];
  c.total = sigma.total();
  return c;
}

}  // namespace cgmc
