#pragma once

#include <optional>
#include <vector>

#include "cgmc/lattice_model.hpp"

namespace cgmc {

// log C(q, j) for j = 0..q, built once from cumulative log sums.
class BinomialLogTable {
 public:
  explicit BinomialLogTable(int q);
  int q() const { return q_; }
  double log_choose(int j) const { return table_[static_cast<std::size_t>(j)]; }

 private:
  int q_;
  std::vector<double> table_;
};

// Cell-averaged long-range potential and the coarse Hamiltonian built on it:
//   Hbar(eta) = -1/2 sum_{k != l} jbar(k,l) eta(k) eta(l)
//               -1/2 sum_l jbar(l,l) eta(l)(eta(l)-1)
//               - hbar * sum_k eta(k).
// Only the long-range kernel is compressed; the short-range part stays with
// the fine-level accept-reject.
class CompressedKernel {
 public:
  // jbar(k,l) = (1/q^2)     sum_{x in C_k} sum_{y in C_l} J(x-y)   for k != l
  // jbar(k,k) = 1/(q(q-1))  sum_{x,y in C_k, y != x}      J(x-y)   (0 when q=1)
  static CompressedKernel compress(const ModelSpec& model, int q);

  int m() const { return m_; }
  int q() const { return q_; }
  double hbar() const { return hbar_; }
  // Discrete-gradient estimate of the compression parameter q/L * |grad V|_1;
  // exactly 0 for mean-field kernels, whose compression is lossless.
  double epsilon_estimate() const { return epsilon_; }
  const BinomialLogTable& binomial() const { return binom_; }

  double offdiag(int k, int l) const { return row_[static_cast<std::size_t>(k) * m_ + l]; }
  double diag(int k) const { return diag_[static_cast<std::size_t>(k)]; }

  double coarse_energy(const CoarseConfig& eta) const;

  // Energy change of eta(k) += s. O(M). nullopt when the move leaves [0, q];
  // the sampler treats that as an immediate rejection, not an error.
  std::optional<double> coarse_delta(const CoarseConfig& eta, int k, int s) const;

  // log of the coarse-prior ratio Pbar(eta')/Pbar(eta) for the same move,
  // i.e. log C(q, eta(k)+s) - log C(q, eta(k)). nullopt when infeasible.
  std::optional<double> prior_logratio(const CoarseConfig& eta, int k, int s) const;

 private:
  CompressedKernel(int m, int q, double hbar) : m_(m), q_(q), hbar_(hbar), binom_(q) {}

  int m_;
  int q_;
  double hbar_;
  double epsilon_ = 0.0;
  BinomialLogTable binom_;
  std::vector<double> row_;   // m x m, diagonal entries stored as 0
  std::vector<double> diag_;  // jbar(k,k)
};

// One microscopic reconstruction move: the site to toggle inside cell k and
// the reconstruction-density log ratio entering the fine acceptance. The
// ratio cancels the coarse-prior ratio exactly:
//   log_fr_ratio = log C(q, eta(k)) - log C(q, eta(k)+s).
struct Reconstruction {
  int site = -1;
  double log_fr_ratio = 0.0;
};

// Uniformly picks one site of the right state (empty for s=+1, occupied for
// s=-1) inside cell k. The caller applies the flip on acceptance. s=+1
// requires an empty site in the cell, s=-1 an occupied one.
Reconstruction reconstruct_cell(const SpinConfig& sigma, int k, int s, int q,
                                const BinomialLogTable& binom, Rng& rng);

// Cross-validation mode: resample the whole cell uniformly among the
// C(q, eta(k)+s) arrangements. `sites` lists the sites whose state changes.
struct CellResample {
  std::vector<int> sites;
  double log_fr_ratio = 0.0;
};

CellResample reconstruct_cell_full(const SpinConfig& sigma, int k, int s, int q,
                                   const BinomialLogTable& binom, Rng& rng);

}  // namespace cgmc
