#include "cgmc/coarse_graining.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cgmc {

BinomialLogTable::BinomialLogTable(int q) : q_(q) {
  if (q < 1) throw ConfigError("binomial table needs q >= 1");
  table_.assign(static_cast<std::size_t>(q) + 1, 0.0);
  // log C(q, j) = sum_{i=1..j} log((q - i + 1) / i), accumulated once
  double acc = 0.0;
  for (int j = 1; j <= q; ++j) {
    acc += std::log(static_cast<double>(q - j + 1)) - std::log(static_cast<double>(j));
    table_[static_cast<std::size_t>(j)] = acc;
  }
  table_[static_cast<std::size_t>(q)] = 0.0;  // C(q,q) = 1 exactly
}

namespace {

int periodic_distance(int a, int b, int n) {
  int d = std::abs(a - b);
  return std::min(d, n - d);
}

}  // namespace

CompressedKernel CompressedKernel::compress(const ModelSpec& model, int q) {
  model.validate();
  const int n = model.lattice.n;
  if (q < 1 || n % q != 0)
    throw ConfigError("compress: q=" + std::to_string(q) + " must divide n=" + std::to_string(n));
  const int m = n / q;

  CompressedKernel ck(m, q, model.field);
  ck.row_.assign(static_cast<std::size_t>(m) * m, 0.0);
  ck.diag_.assign(static_cast<std::size_t>(m), 0.0);

  // Distance-indexed kernels are translation invariant over cells, so one
  // reference row determines the whole table.
  std::vector<double> ref(static_cast<std::size_t>(m), 0.0);
  for (int l = 1; l < m; ++l) {
    double acc = 0.0;
    for (int x = 0; x < q; ++x)
      for (int y = l * q; y < (l + 1) * q; ++y)
        acc += model.long_pair_weight(periodic_distance(x, y, n));
    ref[static_cast<std::size_t>(l)] = acc / (static_cast<double>(q) * q);
  }
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      if (l != k) ck.row_[static_cast<std::size_t>(k) * m + l] = ref[static_cast<std::size_t>((l - k + m) % m)];

  double diag = 0.0;
  if (q > 1) {
    for (int x = 0; x < q; ++x)
      for (int y = 0; y < q; ++y)
        if (y != x) diag += model.long_pair_weight(periodic_distance(x, y, n));
    diag /= static_cast<double>(q) * (q - 1);
  }
  std::fill(ck.diag_.begin(), ck.diag_.end(), diag);

  if (const auto* tab = std::get_if<TabulatedKernel>(&model.long_range)) {
    const int dmax = n / 2;
    double var = 0.0;
    for (int d = 1; d < dmax; ++d)
      var += std::abs(tab->value[static_cast<std::size_t>(d) + 1] - tab->value[static_cast<std::size_t>(d)]);
    var += std::abs(tab->value[static_cast<std::size_t>(dmax)]);
    ck.epsilon_ = static_cast<double>(q) * var;
  }
  return ck;
}

double CompressedKernel::coarse_energy(const CoarseConfig& eta) const {
  contract_check(eta.m() == m_, "coarse_energy: coarse configuration size mismatch");
  double pair = 0.0;
  for (int k = 0; k < m_; ++k) {
    const double* row = row_.data() + static_cast<std::size_t>(k) * m_;
    double coupled = 0.0;
    for (int l = 0; l < m_; ++l) coupled += row[l] * eta.eta[static_cast<std::size_t>(l)];
    pair += coupled * eta.eta[static_cast<std::size_t>(k)];
  }
  double energy = -0.5 * pair;
  for (int k = 0; k < m_; ++k) {
    const double e = eta.eta[static_cast<std::size_t>(k)];
    energy -= 0.5 * diag_[static_cast<std::size_t>(k)] * e * (e - 1.0);
  }
  energy -= hbar_ * static_cast<double>(eta.total);
  return energy;
}

std::optional<double> CompressedKernel::coarse_delta(const CoarseConfig& eta, int k, int s) const {
  contract_check(eta.m() == m_, "coarse_delta: coarse configuration size mismatch");
  contract_check(k >= 0 && k < m_, "coarse_delta: cell index out of range");
  contract_check(s == 1 || s == -1, "coarse_delta: step must be +-1");
  const int occ = eta.eta[static_cast<std::size_t>(k)];
  if (occ + s < 0 || occ + s > q_) return std::nullopt;

  const double* row = row_.data() + static_cast<std::size_t>(k) * m_;
  double coupled = 0.0;
  for (int l = 0; l < m_; ++l) coupled += row[l] * eta.eta[static_cast<std::size_t>(l)];

  double delta = -static_cast<double>(s) * coupled;
  delta -= diag_[static_cast<std::size_t>(k)] * (s > 0 ? static_cast<double>(occ) : -static_cast<double>(occ - 1));
  delta -= hbar_ * static_cast<double>(s);
  return delta;
}

std::optional<double> CompressedKernel::prior_logratio(const CoarseConfig& eta, int k, int s) const {
  contract_check(k >= 0 && k < eta.m(), "prior_logratio: cell index out of range");
  contract_check(s == 1 || s == -1, "prior_logratio: step must be +-1");
  const int occ = eta.eta[static_cast<std::size_t>(k)];
  if (occ + s < 0 || occ + s > binom_.q()) return std::nullopt;
  return binom_.log_choose(occ + s) - binom_.log_choose(occ);
}

Reconstruction reconstruct_cell(const SpinConfig& sigma, int k, int s, int q,
                                const BinomialLogTable& binom, Rng& rng) {
  contract_check(s == 1 || s == -1, "reconstruct_cell: step must be +-1");
  contract_check(q == binom.q(), "reconstruct_cell: binomial table built for a different q");
  const int base = k * q;
  contract_check(base >= 0 && base + q <= sigma.n(), "reconstruct_cell: cell index out of range");

  const bool want_occupied = (s < 0);
  int candidates = 0;
  for (int x = base; x < base + q; ++x)
    if (sigma.occupied(x) == want_occupied) ++candidates;
  contract_check(candidates > 0, "reconstruct_cell: infeasible move requested");

  int pick = rng.index_below(candidates);
  Reconstruction rec;
  for (int x = base; x < base + q; ++x) {
    if (sigma.occupied(x) == want_occupied && pick-- == 0) {
      rec.site = x;
      break;
    }
  }
  const int occ = want_occupied ? candidates : q - candidates;
  rec.log_fr_ratio = binom.log_choose(occ) - binom.log_choose(occ + s);
  return rec;
}

CellResample reconstruct_cell_full(const SpinConfig& sigma, int k, int s, int q,
                                   const BinomialLogTable& binom, Rng& rng) {
  contract_check(s == 1 || s == -1, "reconstruct_cell_full: step must be +-1");
  contract_check(q == binom.q(), "reconstruct_cell_full: binomial table built for a different q");
  const int base = k * q;
  contract_check(base >= 0 && base + q <= sigma.n(), "reconstruct_cell_full: cell index out of range");

  int occ = 0;
  for (int x = base; x < base + q; ++x)
    if (sigma.occupied(x)) ++occ;
  const int target = occ + s;
  contract_check(target >= 0 && target <= q, "reconstruct_cell_full: infeasible move requested");

  // Uniform subset of `target` occupied positions via a partial shuffle.
  std::vector<int> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < target; ++i) {
    const int j = i + rng.index_below(q - i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(q), 0);
  for (int i = 0; i < target; ++i) bits[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;

  CellResample out;
  for (int i = 0; i < q; ++i) {
    const bool now = sigma.occupied(base + i);
    if (now != (bits[static_cast<std::size_t>(i)] != 0)) out.sites.push_back(base + i);
  }
  out.log_fr_ratio = binom.log_choose(occ) - binom.log_choose(target);
  return out;
}

}  // namespace cgmc
