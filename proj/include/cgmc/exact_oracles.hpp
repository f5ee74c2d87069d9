#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cgmc/samplers.hpp"

namespace cgmc {

// Coupling triple of the exactly solvable nearest-neighbour + Curie-Weiss
// spin chain (spin convention, beta absorbed).
struct KardarParams {
  double k = 0.0;
  double j = 0.0;
  double h = 0.0;
};

struct KardarResult {
  double value = 0.0;        // magnetization in [-1,1] (coverage in [0,1])
  double minimizer = 0.0;    // argmin of the free energy, spin units
  bool unique_minimum = true;  // false when two minima tie (first-order point)
};

// Global minimiser of
//   phi(m) = J m^2/2 - log[ e^K cosh(h+Jm) + sqrt(e^{2K} sinh^2(h+Jm) + e^{-2K}) ]
// over m in [-1,1], via a dense grid plus golden-section refinement. For
// |J| < 1e-12 the argmin degenerates and the transfer-matrix closed form
// M = sinh(h)/sqrt(sinh^2 h + e^{-4K}) is used instead. Ties within 1e-12
// are broken toward smaller |m|, then toward positive m.
KardarResult kardar_magnetization(const KardarParams& p);

// Exact equilibrium coverage of the lattice-gas model with couplings
// (K, J, h) in the convention of ModelSpec, through the spin rescaling
//   coverage = (1 + M(K/4, J/4, h/2 + J/4 + K/2)) / 2.
// The coverage jumps at h = -(J/2 + K) in the ferromagnetic regime.
KardarResult kardar_coverage(double k, double j, double h);

struct CurvePoint {
  double h = 0.0;
  double coverage = 0.0;
  bool jump = false;  // coverage moved by > 0.2 from the previous grid point
  bool tie = false;   // two free-energy minima tied at this field
};

// Evaluates kardar_coverage over a sorted field grid and marks jump cells.
std::vector<CurvePoint> coverage_curve(double k, double j, const std::vector<double>& h_grid);

struct GibbsTable {
  double log_z = 0.0;  // log of 2^-N sum_sigma exp(-beta H)
  double z = 0.0;      // exp(log_z); may overflow for extreme couplings
  double mean_coverage = 0.0;
  std::vector<double> probability;  // indexed by the occupancy bit pattern
};

// Exhaustive Gibbs summation, N <= 24. Log-sum-exp stabilised, Kahan
// accumulation, incremental Gray-code energies with periodic recomputation.
GibbsTable enumerate_gibbs(const ModelSpec& model);

struct CoarseMarginalReport {
  int m = 0;
  int q = 0;
  std::vector<double> exact;   // fbar(eta), exact coarse marginal
  std::vector<double> model0;  // fbar0(eta) from the compressed Hamiltonian
  // Mixed-radix index of a coarse state: sum_k eta(k) * (q+1)^k.
  double rel_entropy_per_site = 0.0;             // R(fbar0 | fbar) / N
  double reconstruction_entropy_per_site = 0.0;  // lifting error term
  double total_rel_entropy_per_site = 0.0;       // equals the sum of the two
};

// Exact coarse marginal versus the compressed-Hamiltonian approximation,
// with the relative-entropy decomposition into coarse and reconstruction
// terms. N <= 20.
CoarseMarginalReport exact_coarse_marginal(const ModelSpec& model, int q);

// One-step transition matrix over all 2^N states, N <= 12, including every
// proposal, acceptance and reconstruction factor plus the diagonal rejection
// mass. Rows sum to one.
Eigen::MatrixXd build_transition_matrix(SamplerKind kind, const ModelSpec& model, int q = 1,
                                        ReconstructionMode mode = ReconstructionMode::SingleSite);

struct SpectrumOptions {
  bool check_mixing_bound = true;  // validate the TV bound at n = 1, 10, 100
};

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending; last entry should be 1
  double spectral_gap = 0.0;        // 1 - beta_1
  double beta_star = 0.0;           // max(|beta_min|, beta_1)
  double db_violation = 0.0;        // max relative detailed-balance residual
  double stationary_tv_error = 0.0;  // leading eigenvector vs the target
  double row_sum_error = 0.0;        // max |row sum - 1|
  bool reliable = true;              // false when db_violation > 1e-8
  bool mixing_bound_checked = false;
  double mixing_bound_margin = 0.0;  // min over (n, state) of bound - 2*TV
};

// Spectral diagnostics of a reversible kernel: symmetrise by the similarity
// transform D^{1/2} K D^{-1/2} with D = diag(target), take the full real
// spectrum, and compare the leading eigenvector with the target. When the
// detailed-balance residual exceeds 1e-8 the report is flagged unreliable
// rather than silently returning a complex spectrum.
SpectrumReport analyze_kernel(const Eigen::MatrixXd& kernel, const std::vector<double>& target,
                              const SpectrumOptions& opts = {});

struct GapBoundsReport {
  double lambda_classical = 0.0;
  double lambda_coupled = 0.0;
  double a_inf = 0.0;     // inf over single-flip pairs of the case factor A
  double gamma_lo = 0.0;  // inf of the proposal-ratio factor B
  double gamma_hi = 0.0;  // sup of B
  bool bound_holds = false;
  SpectrumReport classical;
  SpectrumReport coupled;
};

// Numerical spectral-gap sandwich
//   a_inf * gamma_lo * lambda(Kc) <= lambda(Kcg) <= gamma_hi * lambda(Kc)
// evaluated on the exact kernels of both samplers. N <= 10.
GapBoundsReport gap_bounds(const ModelSpec& model, int q);

}  // namespace cgmc
