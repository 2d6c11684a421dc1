#pragma once

// Augmented Lagrangian / alternating-directions solvers for
//
//   Principal Component Pursuit   min ||L||_* + lambda ||S||_1  s.t.  L + S = M
//   robust completion             min ||L||_* + lambda ||S||_1  s.t.  P_obs(L + S) = P_obs(M)
//   nuclear-norm completion       min ||L||_*                   s.t.  P_obs(L) = P_obs(M)
//
// All three share one loop with constant penalty beta, starting from Y = 0
// and S = S_{lambda/beta}(M) (the S-update at L = Y = 0):
//
//   L <- D_{1/beta}(M - S + Y / beta)
//   S <- S_{lambda/beta}(M - L + Y / beta)      (per-entry rule, see SparseRule)
//   Y <- Y + beta (M - L - S)
//
// until ||M - L - S||_F <= tol ||M||_F.

#include "pcp/core.hpp"
#include "pcp/prox.hpp"

#include <chrono>
#include <functional>
#include <optional>

namespace pcp {

struct SolverConfig {
  std::optional<double> lambda;  // nullopt = automatic
  std::optional<double> beta;    // quadratic-penalty coefficient; nullopt = automatic
  double tol = 1e-7;
  int max_iters = 1000;
  std::optional<Index> rank_guess;  // nullopt = min(10, min(n1, n2))
  double full_svd_threshold = 0.2;  // fraction of min(n1, n2)
};

/// Snapshot handed to SolverObserver after every iteration.
struct IterationInfo {
  int iteration = 0;  // 1-based
  const DenseMatrix& svt_input;
  double svt_tau = 0.0;
  const DenseMatrix& l;
  const DenseMatrix& s;
  const DenseMatrix& y;
  double residual = 0.0;  // ||M - L - S||_F / ||M||_F
};

using SolverObserver = std::function<void(const IterationInfo&)>;

struct PcpSolution {
  DenseMatrix l_hat;
  DenseMatrix s_hat;
  int iterations = 0;
  std::size_t svd_count = 0;
  double final_residual = 0.0;
  std::size_t rank_l = 0;
  std::size_t card_s = 0;
  bool converged = false;
  std::chrono::duration<double> wall_time{0};
  double lambda = 0.0;  // +inf for nuclear-norm completion
  double beta = 0.0;
};

/// Entries of S counted as nonzero: |s_ij| > 1e-6 * ||M||_inf.
inline constexpr double kCardinalityThreshold = 1e-6;

namespace detail {

enum class SparseRule {
  kShrinkAll,       // PCP: shrink every entry
  kShrinkObserved,  // robust completion: shrink on obs, free off obs
  kZeroObserved,    // nuclear completion: S = 0 on obs, free off obs
};

inline void validate(const SolverConfig& cfg, Index n1, Index n2) {
  require(cfg.tol > 0.0, "SolverConfig: tol must be positive");
  require(cfg.max_iters >= 1, "SolverConfig: max_iters must be at least 1");
  require(!cfg.lambda || *cfg.lambda > 0.0, "SolverConfig: lambda must be positive");
  require(!cfg.beta || *cfg.beta > 0.0, "SolverConfig: beta must be positive");
  if (cfg.rank_guess) {
    require(*cfg.rank_guess >= 1 && *cfg.rank_guess <= std::min(n1, n2), "SolverConfig: rank_guess out of range");
  }
  require(cfg.full_svd_threshold >= 0.0, "SolverConfig: full_svd_threshold must be nonnegative");
}

inline PcpSolution run_alm(const DenseMatrix& m, const DenseMatrix* observed, SparseRule rule, double lambda,
                           double beta, const SolverConfig& cfg, const SolverObserver& observer) {
  const auto started = std::chrono::steady_clock::now();
  const Index n1 = m.rows();
  const Index n2 = m.cols();
  const Index p = std::min(n1, n2);

  PcpSolution sol;
  sol.lambda = lambda;
  sol.beta = beta;
  const double m_norm = m.norm();
  if (m_norm == 0.0) {
    sol.l_hat = DenseMatrix::Zero(n1, n2);
    sol.s_hat = DenseMatrix::Zero(n1, n2);
    sol.iterations = 1;
    sol.converged = true;
    sol.wall_time = std::chrono::steady_clock::now() - started;
    return sol;
  }

  RankSchedule schedule(p, cfg.rank_guess.value_or(std::min<Index>(10, p)), cfg.full_svd_threshold);
  DenseMatrix l = DenseMatrix::Zero(n1, n2);
  DenseMatrix s = DenseMatrix::Zero(n1, n2);
  DenseMatrix y = DenseMatrix::Zero(n1, n2);
  DenseMatrix residual(n1, n2);
  const double inv_beta = 1.0 / beta;
  const double sparse_tau = lambda * inv_beta;
  auto sparse_step = [&](const DenseMatrix& target) -> DenseMatrix {
    switch (rule) {
      case SparseRule::kShrinkAll:
        return shrink(target, sparse_tau);
      case SparseRule::kShrinkObserved:
        return observed->cwiseProduct(shrink(target, sparse_tau)) +
               (1.0 - observed->array()).matrix().cwiseProduct(target);
      case SparseRule::kZeroObserved:
        break;
    }
    return (1.0 - observed->array()).matrix().cwiseProduct(target);
  };
  Vector last_sigma;

  // S starts at its exact minimizer for L = Y = 0 (sweep order S, L, Y from L = Y = 0).
  s = sparse_step(m);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const DenseMatrix svt_input = m - s + inv_beta * y;
    SvtResult step = svt(svt_input, inv_beta, schedule);
    l = std::move(step.value);
    last_sigma = std::move(step.shrunk_sigma);
    sol.svd_count += step.svd_calls;

    s = sparse_step(m - l + inv_beta * y);

    residual = m - l - s;
    y += beta * residual;
    const double rel = residual.norm() / m_norm;
    sol.iterations = it;
    sol.final_residual = rel;
    if (observer) observer(IterationInfo{it, svt_input, inv_beta, l, s, y, rel});
    if (!std::isfinite(rel)) throw NumericalFailure("solver: iterate became non-finite");
    if (rel <= cfg.tol) {
      sol.converged = true;
      break;
    }
  }

  sol.rank_l = numerical_rank(last_sigma, n1, n2);
  const double card_cut = kCardinalityThreshold * norm_linf(m);
  std::size_t card = 0;
  for (Index j = 0; j < n2; ++j) {
    for (Index i = 0; i < n1; ++i) {
      if (rule == SparseRule::kShrinkObserved && (*observed)(i, j) == 0.0) continue;
      if (std::abs(s(i, j)) > card_cut) ++card;
    }
  }
  sol.card_s = card;
  sol.l_hat = std::move(l);
  sol.s_hat = std::move(s);
  sol.wall_time = std::chrono::steady_clock::now() - started;
  return sol;
}

inline DenseMatrix zero_filled(const DenseMatrix& y_obs, const SupportMask& obs) {
  if (y_obs.rows() != obs.rows() || y_obs.cols() != obs.cols()) throw InvalidArgument("solver: mask shape mismatch");
  return proj_support(y_obs, obs);
}

/// beta = |obs| / (4 ||M||_1); equals n1 n2 / (4 ||M||_1) for a full mask.
inline double default_beta(const DenseMatrix& m, std::size_t observed_count) {
  const double l1 = norm_l1(m);
  return l1 > 0.0 ? static_cast<double>(observed_count) / (4.0 * l1) : 1.0;
}

}  // namespace detail

/// lambda = 1 / sqrt(max(n1, n2)).
inline double default_lambda(Index n1, Index n2) { return 1.0 / std::sqrt(static_cast<double>(std::max(n1, n2))); }

/// Principal Component Pursuit on a fully observed matrix.
inline PcpSolution solve_pcp(const DenseMatrix& m, const SolverConfig& cfg = {}, const SolverObserver& observer = {}) {
  require(m.size() > 0, "solve_pcp: empty matrix");
  if (!m.allFinite()) throw InvalidArgument("solve_pcp: matrix has non-finite entries");
  detail::validate(cfg, m.rows(), m.cols());
  const double lambda = cfg.lambda.value_or(default_lambda(m.rows(), m.cols()));
  const double beta = cfg.beta.value_or(detail::default_beta(m, static_cast<std::size_t>(m.size())));
  return detail::run_alm(m, nullptr, detail::SparseRule::kShrinkAll, lambda, beta, cfg, observer);
}

/// Robust matrix completion. Entries of y_obs off `obs` are ignored.
/// Default lambda = 1 / sqrt(p_obs * max(n1, n2)) with p_obs = |obs| / (n1 n2).
inline PcpSolution solve_pcp_completion(const DenseMatrix& y_obs, const SupportMask& obs, const SolverConfig& cfg = {},
                                        const SolverObserver& observer = {}) {
  require(!obs.empty(), "solve_pcp_completion: empty observation mask");
  const DenseMatrix m = detail::zero_filled(y_obs, obs);
  if (!m.allFinite()) throw InvalidArgument("solve_pcp_completion: observed entries are non-finite");
  detail::validate(cfg, m.rows(), m.cols());
  const double p_obs = static_cast<double>(obs.size()) / static_cast<double>(m.size());
  const double lambda =
      cfg.lambda.value_or(1.0 / std::sqrt(p_obs * static_cast<double>(std::max(m.rows(), m.cols()))));
  const double beta = cfg.beta.value_or(detail::default_beta(m, obs.size()));
  const DenseMatrix indicator = obs.indicator();
  return detail::run_alm(m, &indicator, detail::SparseRule::kShrinkObserved, lambda, beta, cfg, observer);
}

/// Nuclear-norm matrix completion (exact agreement on `obs`). s_hat holds
/// the slack on unobserved entries; lambda is reported as +inf.
inline PcpSolution solve_nuclear_completion(const DenseMatrix& y_obs, const SupportMask& obs,
                                            const SolverConfig& cfg = {}, const SolverObserver& observer = {}) {
  require(!obs.empty(), "solve_nuclear_completion: empty observation mask");
  const DenseMatrix m = detail::zero_filled(y_obs, obs);
  if (!m.allFinite()) throw InvalidArgument("solve_nuclear_completion: observed entries are non-finite");
  detail::validate(cfg, m.rows(), m.cols());
  const double beta = cfg.beta.value_or(detail::default_beta(m, obs.size()));
  const DenseMatrix indicator = obs.indicator();
  return detail::run_alm(m, &indicator, detail::SparseRule::kZeroObserved, std::numeric_limits<double>::infinity(),
                         beta, cfg, observer);
}

/// ||estimate - truth||_F / ||truth||_F (plain Frobenius error when truth is zero).
inline double relative_error(const DenseMatrix& estimate, const DenseMatrix& truth) {
  require_same_shape(estimate, truth, "relative_error");
  const double denom = truth.norm();
  const double diff = (estimate - truth).norm();
  return denom > 0.0 ? diff / denom : diff;
}

}  // namespace pcp
