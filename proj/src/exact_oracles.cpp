#include "cgmc/exact_oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace cgmc {

namespace {

// log of the leading transfer-matrix eigenvalue
//   lambda(K, a) = e^K cosh(a) + sqrt(e^{2K} sinh^2(a) + e^{-2K}),
// evaluated in log space so large fields do not overflow.
double log_lambda_max(double k, double a) {
  const double t = std::abs(a);
  const double u = std::exp(-2.0 * t);
  const double inner =
      (1.0 + u) / 2.0 + std::sqrt((1.0 - u) * (1.0 - u) / 4.0 + std::exp(-4.0 * k - 2.0 * t));
  return k + t + std::log(inner);
}

double kardar_free_energy(double m, const KardarParams& p) {
  return 0.5 * p.j * m * m - log_lambda_max(p.k, p.h + p.j * m);
}

template <typename F>
double golden_minimize(double lo, double hi, F&& f) {
  constexpr double ratio = 0.6180339887498949;
  double c = hi - ratio * (hi - lo);
  double d = lo + ratio * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > 1e-12) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - ratio * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + ratio * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

double transfer_matrix_magnetization(double k, double h) {
  if (h == 0.0) return 0.0;
  const double t = std::abs(h);
  // log sinh t, stable for every t > 0
  const double log_sinh = t + std::log1p(-std::exp(-2.0 * t)) - std::log(2.0);
  const double ratio = std::exp(-4.0 * k - 2.0 * log_sinh);
  const double m = 1.0 / std::sqrt(1.0 + ratio);
  return h > 0.0 ? m : -m;
}

// Interior minima of the free energy satisfy m = M_tm(K, h + J m). A few
// fixed-point sweeps recover the (+-)symmetry and the last digits that
// golden section loses to the flat bottom; kept only when the stationarity
// residual actually improves.
double polish_minimizer(double m, const KardarParams& p) {
  const auto residual = [&p](double x) {
    return std::abs(x - transfer_matrix_magnetization(p.k, p.h + p.j * x));
  };
  double polished = m;
  for (int iter = 0; iter < 60; ++iter) {
    const double next = std::clamp(transfer_matrix_magnetization(p.k, p.h + p.j * polished), -1.0, 1.0);
    if (std::abs(next - polished) <= 1e-15) {
      polished = next;
      break;
    }
    polished = next;
  }
  if (residual(polished) < residual(m) &&
      kardar_free_energy(polished, p) <= kardar_free_energy(m, p) + 1e-14)
    return polished;
  return m;
}

double accept_prob(double log_ratio) { return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio); }

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

KardarResult kardar_magnetization(const KardarParams& p) {
  contract_check(std::isfinite(p.k) && std::isfinite(p.j) && std::isfinite(p.h),
                 "kardar_magnetization: parameters must be finite");
  KardarResult out;
  if (std::abs(p.j) < 1e-12) {
    // the free energy is flat in m; fall back to the closed form
    out.minimizer = transfer_matrix_magnetization(p.k, p.h);
    out.value = out.minimizer;
    return out;
  }

  const auto phi = [&p](double m) { return kardar_free_energy(m, p); };
  constexpr int grid = 2001;
  std::vector<double> values(grid);
  for (int i = 0; i < grid; ++i)
    values[static_cast<std::size_t>(i)] = phi(-1.0 + 2.0 * i / (grid - 1));

  // refine every local basin of the grid scan
  std::vector<std::pair<double, double>> candidates;  // (phi*, m*)
  for (int i = 0; i < grid; ++i) {
    const double self = values[static_cast<std::size_t>(i)];
    const bool left_ok = (i == 0) || values[static_cast<std::size_t>(i - 1)] >= self;
    const bool right_ok = (i == grid - 1) || values[static_cast<std::size_t>(i + 1)] >= self;
    if (!left_ok || !right_ok) continue;
    const double lo = std::max(-1.0, -1.0 + 2.0 * (i - 1) / (grid - 1));
    const double hi = std::min(1.0, -1.0 + 2.0 * (i + 1) / (grid - 1));
    const double m = polish_minimizer(golden_minimize(lo, hi, phi), p);
    candidates.emplace_back(phi(m), m);
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& [f, m] : candidates) best = std::min(best, f);

  double chosen = 0.0;
  bool have = false;
  int n_tied = 0;
  for (const auto& [f, m] : candidates) {
    if (f > best + 1e-12) continue;
    if (have && std::abs(m - chosen) <= 1e-8) continue;  // same basin refined twice
    ++n_tied;
    if (!have || std::abs(m) < std::abs(chosen) - 1e-9 ||
        (std::abs(std::abs(m) - std::abs(chosen)) <= 1e-9 && m > chosen)) {
      chosen = m;
      have = true;
    }
  }
  out.minimizer = std::clamp(chosen, -1.0, 1.0);
  out.value = out.minimizer;
  out.unique_minimum = n_tied <= 1;
  return out;
}

KardarResult kardar_coverage(double k, double j, double h) {
  KardarParams spin;
  spin.k = k / 4.0;
  spin.j = j / 4.0;
  spin.h = h / 2.0 + j / 4.0 + k / 2.0;
  KardarResult r = kardar_magnetization(spin);
  r.value = std::clamp(0.5 * (r.value + 1.0), 0.0, 1.0);
  return r;
}

std::vector<CurvePoint> coverage_curve(double k, double j, const std::vector<double>& h_grid) {
  contract_check(!h_grid.empty(), "coverage_curve: empty field grid");
  for (std::size_t i = 1; i < h_grid.size(); ++i)
    contract_check(h_grid[i] > h_grid[i - 1], "coverage_curve: field grid must be sorted ascending");

  std::vector<CurvePoint> out(h_grid.size());
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    const KardarResult r = kardar_coverage(k, j, h_grid[i]);
    out[i].h = h_grid[i];
    out[i].coverage = r.value;
    out[i].tie = !r.unique_minimum;
    out[i].jump = i > 0 && std::abs(out[i].coverage - out[i - 1].coverage) > 0.2;
  }
  return out;
}

GibbsTable enumerate_gibbs(const ModelSpec& model) {
  model.validate();
  const int n = model.lattice.n;
  if (n > 24) throw ResourceError("enumerate_gibbs caps at N = 24, got N = " + std::to_string(n));
  const std::uint64_t count = 1ULL << n;
  // exact energies at small sizes; incremental Gray-code walk beyond
  const std::uint64_t recompute_period = n <= 14 ? 1 : 1024;

  GibbsTable table;
  table.probability.assign(count, 0.0);

  SpinConfig sigma(n);
  double energy = total_energy(sigma, model);
  double emin = energy;
  table.probability[0] = energy;
  for (std::uint64_t i = 1; i < count; ++i) {
    const int bit = std::countr_zero(i);
    if (recompute_period == 1 || (i % recompute_period) == 0) {
      sigma.flip(bit);
      energy = total_energy(sigma, model);
    } else {
      energy += flip_delta(sigma, bit, model);
      sigma.flip(bit);
    }
    const std::uint64_t state = i ^ (i >> 1);
    table.probability[state] = energy;
    emin = std::min(emin, energy);
  }

  KahanSum z, cov;
  for (std::uint64_t state = 0; state < count; ++state) {
    const double w = std::exp(-(table.probability[state] - emin));
    table.probability[state] = w;
    z.add(w);
    cov.add(w * static_cast<double>(std::popcount(state)) / static_cast<double>(n));
  }
  for (auto& p : table.probability) p /= z.sum;
  table.mean_coverage = cov.sum / z.sum;
  table.log_z = std::log(z.sum) - emin - static_cast<double>(n) * std::log(2.0);
  table.z = std::exp(table.log_z);
  return table;
}

namespace {

std::uint64_t coarse_index(std::uint64_t bits, int m, int q) {
  std::uint64_t idx = 0;
  std::uint64_t stride = 1;
  const std::uint64_t cell_mask = (1ULL << q) - 1;
  for (int k = 0; k < m; ++k) {
    const auto occ = static_cast<std::uint64_t>(std::popcount((bits >> (k * q)) & cell_mask));
    idx += occ * stride;
    stride *= static_cast<std::uint64_t>(q) + 1;
  }
  return idx;
}

}  // namespace

CoarseMarginalReport exact_coarse_marginal(const ModelSpec& model, int q) {
  model.validate();
  const int n = model.lattice.n;
  if (n > 20) throw ResourceError("exact_coarse_marginal caps at N = 20, got N = " + std::to_string(n));
  const CompressedKernel ck = CompressedKernel::compress(model, q);
  const int m = n / q;

  const GibbsTable gibbs = enumerate_gibbs(model);
  const std::uint64_t micro_count = 1ULL << n;

  std::uint64_t coarse_count = 1;
  for (int k = 0; k < m; ++k) coarse_count *= static_cast<std::uint64_t>(q) + 1;

  CoarseMarginalReport rep;
  rep.m = m;
  rep.q = q;
  rep.exact.assign(coarse_count, 0.0);
  rep.model0.assign(coarse_count, 0.0);

  for (std::uint64_t bits = 0; bits < micro_count; ++bits)
    rep.exact[coarse_index(bits, m, q)] += gibbs.probability[bits];

  // fbar0(eta) ~ exp(-Hbar(eta)) * prod_k C(q, eta(k))
  const BinomialLogTable& binom = ck.binomial();
  std::vector<double> logw(coarse_count);
  CoarseConfig eta;
  eta.q = q;
  eta.eta.assign(static_cast<std::size_t>(m), 0);
  eta.total = 0;
  double logw_max = -std::numeric_limits<double>::infinity();
  for (std::uint64_t idx = 0;; ++idx) {
    double log_prior = 0.0;
    for (int k = 0; k < m; ++k) log_prior += binom.log_choose(eta.eta[static_cast<std::size_t>(k)]);
    logw[idx] = -ck.coarse_energy(eta) + log_prior;
    logw_max = std::max(logw_max, logw[idx]);
    // odometer increment over [0, q]^m
    int k = 0;
    while (k < m) {
      auto& e = eta.eta[static_cast<std::size_t>(k)];
      if (e < q) {
        ++e;
        ++eta.total;
        break;
      }
      eta.total -= q;
      e = 0;
      ++k;
    }
    if (k == m) break;
  }
  KahanSum norm;
  for (std::uint64_t idx = 0; idx < coarse_count; ++idx) {
    rep.model0[idx] = std::exp(logw[idx] - logw_max);
    norm.add(rep.model0[idx]);
  }
  for (auto& p : rep.model0) p /= norm.sum;

  KahanSum coarse_term;
  for (std::uint64_t idx = 0; idx < coarse_count; ++idx)
    if (rep.model0[idx] > 0.0) coarse_term.add(rep.model0[idx] * std::log(rep.model0[idx] / rep.exact[idx]));
  rep.rel_entropy_per_site = coarse_term.sum / static_cast<double>(n);

  // reconstruction term: uniform conditional nu(sigma|eta) vs the exact
  // conditional mu(sigma|eta), averaged over fbar0
  KahanSum recon_term, total_term;
  for (std::uint64_t bits = 0; bits < micro_count; ++bits) {
    const std::uint64_t idx = coarse_index(bits, m, q);
    double log_nu = 0.0;
    const std::uint64_t cell_mask = (1ULL << q) - 1;
    for (int k = 0; k < m; ++k)
      log_nu -= binom.log_choose(std::popcount((bits >> (k * q)) & cell_mask));
    const double nu = std::exp(log_nu);
    const double mu_cond = gibbs.probability[bits] / rep.exact[idx];
    recon_term.add(rep.model0[idx] * nu * std::log(nu / mu_cond));
    const double mu_app = rep.model0[idx] * nu;
    if (mu_app > 0.0) total_term.add(mu_app * std::log(mu_app / gibbs.probability[bits]));
  }
  rep.reconstruction_entropy_per_site = recon_term.sum / static_cast<double>(n);
  rep.total_rel_entropy_per_site = total_term.sum / static_cast<double>(n);
  return rep;
}

Eigen::MatrixXd build_transition_matrix(SamplerKind kind, const ModelSpec& model, int q,
                                        ReconstructionMode mode) {
  model.validate();
  const int n = model.lattice.n;
  if (n > 12) throw ResourceError("build_transition_matrix caps at N = 12, got N = " + std::to_string(n));
  const std::uint64_t count = 1ULL << n;
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count),
                                                 static_cast<Eigen::Index>(count));

  if (kind == SamplerKind::Classical) {
    for (std::uint64_t bits = 0; bits < count; ++bits) {
      const SpinConfig sigma = SpinConfig::from_bits(n, bits);
      const auto row = static_cast<Eigen::Index>(bits);
      for (int x = 0; x < n; ++x) {
        const double delta = flip_delta(sigma, x, model);
        const double a = accept_prob(-delta);
        kernel(row, static_cast<Eigen::Index>(bits ^ (1ULL << x))) += a / n;
        kernel(row, row) += (1.0 - a) / n;
      }
    }
    return kernel;
  }

  const CompressedKernel ck = CompressedKernel::compress(model, q);
  const int m = ck.m();
  const double proposal = 1.0 / (2.0 * m);
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    const SpinConfig sigma = SpinConfig::from_bits(n, bits);
    const CoarseConfig eta = project(sigma, q);
    const auto row = static_cast<Eigen::Index>(bits);
    for (int k = 0; k < m; ++k) {
      for (int sign : {+1, -1}) {
        const auto dbar = ck.coarse_delta(eta, k, sign);
        if (!dbar) {
          kernel(row, row) += proposal;  // boundary move, rejected in place
          continue;
        }
        const double prior = *ck.prior_logratio(eta, k, sign);
        const double acg = accept_prob(-*dbar + prior);
        kernel(row, row) += proposal * (1.0 - acg);

        if (mode == ReconstructionMode::SingleSite) {
          const bool want_occupied = sign < 0;
          int cnt = 0;
          for (int x = k * q; x < (k + 1) * q; ++x)
            if (sigma.occupied(x) == want_occupied) ++cnt;
          for (int x = k * q; x < (k + 1) * q; ++x) {
            if (sigma.occupied(x) != want_occupied) continue;
            const double delta = flip_delta(sigma, x, model);
            const double af = accept_prob(-(delta - *dbar));
            kernel(row, static_cast<Eigen::Index>(bits ^ (1ULL << x))) += proposal * acg * af / cnt;
            kernel(row, row) += proposal * acg * (1.0 - af) / cnt;
          }
        } else {
          const int target = eta.eta[static_cast<std::size_t>(k)] + sign;
          const std::uint64_t cell_mask = ((1ULL << q) - 1) << (k * q);
          int arrangements = 0;
          for (std::uint64_t sub = 0; sub < (1ULL << q); ++sub)
            if (std::popcount(sub) == target) ++arrangements;
          const double base_energy = total_energy(sigma, model);
          for (std::uint64_t sub = 0; sub < (1ULL << q); ++sub) {
            if (std::popcount(sub) != target) continue;
            const std::uint64_t moved = (bits & ~cell_mask) | (sub << (k * q));
            const double delta = total_energy(SpinConfig::from_bits(n, moved), model) - base_energy;
            const double af = accept_prob(-(delta - *dbar));
            kernel(row, static_cast<Eigen::Index>(moved)) += proposal * acg * af / arrangements;
            kernel(row, row) += proposal * acg * (1.0 - af) / arrangements;
          }
        }
      }
    }
  }
  return kernel;
}

namespace {

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& base, int exponent) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(base.rows(), base.cols());
  Eigen::MatrixXd acc = base;
  int e = exponent;
  while (e > 0) {
    if (e & 1) result = result * acc;
    e >>= 1;
    if (e > 0) acc = acc * acc;
  }
  return result;
}

}  // namespace

SpectrumReport analyze_kernel(const Eigen::MatrixXd& kernel, const std::vector<double>& target,
                              const SpectrumOptions& opts) {
  const auto size = kernel.rows();
  contract_check(kernel.cols() == size, "analyze_kernel: kernel must be square");
  contract_check(static_cast<Eigen::Index>(target.size()) == size,
                 "analyze_kernel: target size mismatch");
  for (double f : target) contract_check(f > 0.0, "analyze_kernel: target must be strictly positive");

  SpectrumReport rep;
  for (Eigen::Index i = 0; i < size; ++i)
    rep.row_sum_error = std::max(rep.row_sum_error, std::abs(kernel.row(i).sum() - 1.0));

  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = i + 1; j < size; ++j) {
      const double flux_ij = kernel(i, j) * target[static_cast<std::size_t>(i)];
      const double flux_ji = kernel(j, i) * target[static_cast<std::size_t>(j)];
      const double denom = std::max(flux_ij + flux_ji, 1e-300);
      rep.db_violation = std::max(rep.db_violation, std::abs(flux_ij - flux_ji) / denom);
    }
  }
  rep.reliable = rep.db_violation <= 1e-8;

  Eigen::VectorXd sqrt_f(size);
  for (Eigen::Index i = 0; i < size; ++i) sqrt_f(i) = std::sqrt(target[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd sym = kernel;
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j) sym(i, j) *= sqrt_f(i) / sqrt_f(j);
  sym = 0.5 * (sym + sym.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  contract_check(solver.info() == Eigen::Success, "analyze_kernel: eigendecomposition failed");
  rep.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + size);
  const double beta0 = rep.eigenvalues.back();
  const double beta1 = size >= 2 ? rep.eigenvalues[static_cast<std::size_t>(size - 2)] : beta0;
  rep.spectral_gap = 1.0 - beta1;
  rep.beta_star = std::max(std::abs(rep.eigenvalues.front()), beta1);

  Eigen::VectorXd lead = solver.eigenvectors().col(size - 1);
  Eigen::VectorXd pi = lead.cwiseProduct(sqrt_f);
  if (pi.sum() < 0.0) pi = -pi;
  pi /= pi.sum();
  double tv = 0.0;
  for (Eigen::Index i = 0; i < size; ++i) tv += std::abs(pi(i) - target[static_cast<std::size_t>(i)]);
  rep.stationary_tv_error = tv / 2.0;

  if (opts.check_mixing_bound && rep.reliable) {
    rep.mixing_bound_checked = true;
    rep.mixing_bound_margin = std::numeric_limits<double>::infinity();
    for (int steps : {1, 10, 100}) {
      const Eigen::MatrixXd powered = matrix_power(kernel, steps);
      const double decay = std::pow(rep.beta_star, steps);
      for (Eigen::Index i = 0; i < size; ++i) {
        double row_tv = 0.0;
        for (Eigen::Index j = 0; j < size; ++j)
          row_tv += std::abs(powered(i, j) - target[static_cast<std::size_t>(j)]);
        const double bound = decay / sqrt_f(i);
        rep.mixing_bound_margin = std::min(rep.mixing_bound_margin, bound - row_tv);
      }
    }
  }
  return rep;
}

GapBoundsReport gap_bounds(const ModelSpec& model, int q) {
  model.validate();
  const int n = model.lattice.n;
  if (n > 10) throw ResourceError("gap_bounds caps at N = 10, got N = " + std::to_string(n));

  const GibbsTable gibbs = enumerate_gibbs(model);
  const Eigen::MatrixXd classical = build_transition_matrix(SamplerKind::Classical, model);
  const Eigen::MatrixXd coupled = build_transition_matrix(SamplerKind::Coupled, model, q);

  SpectrumOptions opts;
  opts.check_mixing_bound = false;
  GapBoundsReport rep;
  rep.classical = analyze_kernel(classical, gibbs.probability, opts);
  rep.coupled = analyze_kernel(coupled, gibbs.probability, opts);
  rep.lambda_classical = rep.classical.spectral_gap;
  rep.lambda_coupled = rep.coupled.spectral_gap;

  const CompressedKernel ck = CompressedKernel::compress(model, q);
  const int m = ck.m();
  rep.gamma_lo = std::numeric_limits<double>::infinity();
  rep.gamma_hi = -std::numeric_limits<double>::infinity();
  rep.a_inf = std::numeric_limits<double>::infinity();

  for (std::uint64_t bits = 0; bits < (1ULL << n); ++bits) {
    const SpinConfig sigma = SpinConfig::from_bits(n, bits);
    const CoarseConfig eta = project(sigma, q);
    for (int x = 0; x < n; ++x) {
      const int sign = sigma.occupied(x) ? -1 : +1;
      const int cell = x / q;
      const int occ = eta.eta[static_cast<std::size_t>(cell)];
      const int cnt = sign > 0 ? q - occ : occ;

      // B = qbar0 * f_r / q over this ordered pair
      const double b = static_cast<double>(n) / (2.0 * m * cnt);
      rep.gamma_lo = std::min(rep.gamma_lo, b);
      rep.gamma_hi = std::max(rep.gamma_hi, b);

      const double delta = flip_delta(sigma, x, model);
      const double dbar = *ck.coarse_delta(eta, cell, sign);
      const double prior = *ck.prior_logratio(eta, cell, sign);

      const double log_a = -delta;
      const double log_acg = -dbar + prior;
      const double log_af = -(delta - dbar);
      const bool a1 = log_a >= 0.0;
      const bool b1 = log_acg >= 0.0;
      const bool c1 = log_af >= 0.0;

      double factor;
      if (a1 == b1 && b1 == c1) {
        factor = 1.0;  // C1
      } else if (a1 == c1) {
        factor = std::exp(-std::abs(log_acg));  // C2: coarse-measure ratio
      } else if (a1 == b1) {
        factor = std::exp(-std::abs(log_af - prior));  // C3: f * fbar0 ratio
      } else {
        factor = std::exp(-std::abs(log_a));  // C4: target ratio
      }
      rep.a_inf = std::min(rep.a_inf, factor);
    }
  }

  const double lower = rep.a_inf * rep.gamma_lo * rep.lambda_classical;
  const double upper = rep.gamma_hi * rep.lambda_classical;
  const double slack = 1e-9 * std::max(1.0, rep.lambda_classical);
  rep.bound_holds = lower <= rep.lambda_coupled + slack && rep.lambda_coupled <= upper + slack;
  return rep;
}

}  // namespace cgmc
