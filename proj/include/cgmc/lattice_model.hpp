#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "cgmc/errors.hpp"
#include "cgmc/rng.hpp"

namespace cgmc {

// Periodic 1-D lattice of N sites. All distances below are minimal-image:
// dist(x,y) = min(|x-y|, N-|x-y|).
struct LatticeSpec {
  int n = 0;
  void validate() const {
    if (n < 2) throw ConfigError("lattice size must be >= 2, got " + std::to_string(n));
  }
};

// Nearest-neighbour coupling K. A bond is an unordered site pair at
// periodic distance 1; for N=2 the two sites share a single bond.
struct NearestNeighborKernel {
  double strength = 0.0;  // K
};

// Curie-Weiss coupling: every distinct pair interacts with weight J/N.
struct MeanFieldKernel {
  double strength = 0.0;  // J
};

// Long-range pair potential tabulated by periodic distance. value[d] is the
// weight of one unordered pair at distance d, d in [1, n/2]; entries beyond
// `range` are zero. Any 1/L normalisation is the caller's business.
struct TabulatedKernel {
  std::vector<double> value;  // index by distance, value[0] unused
  int range = 0;              // L
};

using LongRangeKernel = std::variant<MeanFieldKernel, TabulatedKernel>;

// J(d) = (strength/L) * (1 - d/L) for d <= L, a smooth decaying potential
// with total integrated weight ~ strength/2 per direction.
TabulatedKernel make_triangle_kernel(int n, int range, double strength);

// Constant weight at every distance; with pair_weight = J/N this reproduces
// the mean-field kernel exactly.
TabulatedKernel make_constant_kernel(int n, double pair_weight);

// Dimensionless lattice-gas model: energies are beta*H with
//   beta*H(sigma) = - K * sum_<xy> s(x)s(y)
//                   - sum_{pairs} Jpair(dist) s(x)s(y)
//                   - h * sum_x s(x),
// each unordered pair counted once.
struct ModelSpec {
  LatticeSpec lattice;
  NearestNeighborKernel short_range;
  LongRangeKernel long_range;
  double field = 0.0;  // h

  bool long_is_mean_field() const { return std::holds_alternative<MeanFieldKernel>(long_range); }

  // Pair weight of the long-range kernel at a given periodic distance.
  double long_pair_weight(int dist) const;

  // Long-range pair terms one flip_delta call touches: 1 for mean-field
  // (cached total), up to N-1 for a tabulated kernel of range N/2.
  std::int64_t long_eval_cost() const;

  void validate() const;
};

// Microscopic occupancy state with incremental caches: the running particle
// total and, when a coarse level q is attached, per-cell occupancy sums.
class SpinConfig {
 public:
  explicit SpinConfig(int n);

  static SpinConfig all_empty(int n) { return SpinConfig(n); }
  static SpinConfig all_full(int n);
  static SpinConfig random_fill(int n, double density, Rng& rng);
  // Bit i of `bits` is the occupancy of site i (enumeration helper, n <= 63).
  static SpinConfig from_bits(int n, std::uint64_t bits);

  int n() const { return static_cast<int>(occ_.size()); }
  bool occupied(int x) const { return occ_[static_cast<std::size_t>(x)] != 0; }
  int total() const { return total_; }
  double coverage() const { return static_cast<double>(total_) / static_cast<double>(n()); }
  std::uint64_t to_bits() const;

  void attach_cells(int q);
  bool cells_attached() const { return q_ > 0; }
  int cell_size() const { return q_; }
  int cell_count() const { return q_ > 0 ? n() / q_ : 0; }
  int cell_sum(int k) const { return cell_sums_[static_cast<std::size_t>(k)]; }

  // Toggle one site, maintaining all caches.
  void flip(int site);

  // Recompute caches from scratch and compare; throws ContractError on drift.
  void check_caches() const;

 private:
  std::vector<std::uint8_t> occ_;
  int total_ = 0;
  int q_ = 0;
  std::vector<int> cell_sums_;
};

// Block occupancies eta(k) = sum of sigma over cell C_k = [k*q, (k+1)*q).
struct CoarseConfig {
  std::vector<int> eta;
  int q = 1;
  int total = 0;

  int m() const { return static_cast<int>(eta.size()); }
  void validate() const;
};

// beta*H of the full configuration. Pure; O(N) for mean-field long range,
// O(N*L) tabulated.
double total_energy(const SpinConfig& sigma, const ModelSpec& model);

// beta*H(sigma^x) - beta*H(sigma) for a single-site toggle. O(1) for
// nearest-neighbour + mean-field, O(L) for a tabulated long-range kernel.
double flip_delta(const SpinConfig& sigma, int site, const ModelSpec& model);

// Coarse projection eta = T sigma at level q (q must divide N).
CoarseConfig project(const SpinConfig& sigma, int q);

}  // namespace cgmc
