#pragma once

// Proximal operators and the subspace projections composed by the solver
// and the certificate builders.

#include "pcp/core.hpp"
#include "pcp/rng.hpp"
#include "pcp/svd.hpp"

#include <Eigen/Eigenvalues>

#include <functional>
#include <vector>

namespace pcp {

/// Elementwise soft thresholding sgn(x) * max(|x| - tau, 0), with sgn(0) = 0.
inline double shrink(double x, double tau) {
  if (x > tau) return x - tau;
  if (x < -tau) return x + tau;
  return 0.0;
}

inline DenseMatrix shrink(const DenseMatrix& x, double tau) {
  require(tau >= 0.0, "shrink: tau must be nonnegative");
  return x.unaryExpr([tau](double v) { return shrink(v, tau); });
}

/// Result of singular value thresholding.
struct SvtResult {
  DenseMatrix value;             // D_tau(X)
  Vector shrunk_sigma;           // thresholded singular values still above zero, nonincreasing
  std::size_t above = 0;         // count of singular values strictly above tau
  std::size_t svd_calls = 0;     // SVDs computed, including rank-schedule retries
  bool used_full_svd = false;
};

namespace detail {

inline SvtResult assemble_svt(const SvdFactors& f, double tau, Index rows, Index cols) {
  SvtResult out;
  Index above = 0;
  while (above < f.sigma.size() && f.sigma(above) > tau) ++above;
  out.above = static_cast<std::size_t>(above);
  out.shrunk_sigma = f.sigma.head(above).array() - tau;
  if (above == 0) {
    out.value = DenseMatrix::Zero(rows, cols);
  } else {
    out.value = f.u.leftCols(above) * out.shrunk_sigma.asDiagonal() * f.v.leftCols(above).transpose();
  }
  return out;
}

}  // namespace detail

/// D_tau(X) = U S_tau(Sigma) V^T using a full SVD.
inline SvtResult svt(const DenseMatrix& x, double tau) {
  require(tau >= 0.0, "svt: tau must be nonnegative");
  SvtResult out = detail::assemble_svt(svd_full(x), tau, x.rows(), x.cols());
  out.svd_calls = 1;
  out.used_full_svd = true;
  return out;
}

/// Predicts how many singular triplets the next SVT needs.
///
/// After each SVT with prediction sv and observed count svp above the
/// threshold: sv <- svp + 1 when svp < sv, otherwise sv <- svp +
/// max(1, round(0.05 * p)); capped at p = min(rows, cols). A full SVD
/// replaces the truncated one once sv exceeds full_svd_fraction * p.
class RankSchedule {
 public:
  RankSchedule(Index min_dim, Index initial_guess, double full_svd_fraction)
      : p_(min_dim), predicted_(std::clamp<Index>(initial_guess, 1, std::max<Index>(min_dim, 1))),
        full_fraction_(full_svd_fraction) {}

  Index predicted() const noexcept { return predicted_; }
  bool use_full() const noexcept {
    return predicted_ >= p_ || static_cast<double>(predicted_) > full_fraction_ * static_cast<double>(p_);
  }
  Index increment() const noexcept {
    return std::max<Index>(1, static_cast<Index>(std::lround(0.05 * static_cast<double>(p_))));
  }

  void update(std::size_t observed) {
    const auto svp = static_cast<Index>(observed);
    predicted_ = svp < predicted_ ? std::min(svp + 1, p_) : std::min(svp + increment(), p_);
    predicted_ = std::max<Index>(predicted_, 1);
  }

  /// Called when a truncated SVD returned only values above the threshold.
  void widen(std::size_t observed) {
    predicted_ = std::min(static_cast<Index>(observed) + increment(), p_);
  }

 private:
  Index p_;
  Index predicted_;
  double full_fraction_;
};

/// SVT that computes only as many triplets as the schedule predicts. When a
/// truncated SVD finds every computed value above tau it is repeated with a
/// wider rank, so the result always equals the exact D_tau(X).
inline SvtResult svt(const DenseMatrix& x, double tau, RankSchedule& schedule) {
  require(tau >= 0.0, "svt: tau must be nonnegative");
  const Index p = std::min(x.rows(), x.cols());
  std::size_t calls = 0;
  for (;;) {
    const bool full = schedule.use_full();
    const SvdFactors f = full ? svd_full(x) : svd_truncated(x, schedule.predicted());
    ++calls;
    SvtResult out = detail::assemble_svt(f, tau, x.rows(), x.cols());
    if (!full && static_cast<Index>(out.above) == f.sigma.size() && f.sigma.size() < p) {
      schedule.widen(out.above);
      continue;
    }
    out.svd_calls = calls;
    out.used_full_svd = full;
    schedule.update(out.above);
    return out;
  }
}

/// P_Omega(X): keeps entries on omega, zeros elsewhere.
inline DenseMatrix proj_support(const DenseMatrix& x, const SupportMask& omega) {
  if (x.rows() != omega.rows() || x.cols() != omega.cols()) throw InvalidArgument("proj_support: shape mismatch");
  DenseMatrix out = DenseMatrix::Zero(x.rows(), x.cols());
  for (const auto& [i, j] : omega) out(i, j) = x(i, j);
  return out;
}

/// P_Omega^perp(X): zeros the entries on omega.
inline DenseMatrix proj_support_complement(const DenseMatrix& x, const SupportMask& omega) {
  if (x.rows() != omega.rows() || x.cols() != omega.cols()) {
    throw InvalidArgument("proj_support_complement: shape mismatch");
  }
  DenseMatrix out = x;
  for (const auto& [i, j] : omega) out(i, j) = 0.0;
  return out;
}

/// The tangent space T = {U X^T + Y V^T} of the rank-r matrices at U Sigma V^T.
class TangentSpace {
 public:
  /// u: n1 x r and v: n2 x r, both with orthonormal columns (checked to 1e-10).
  TangentSpace(DenseMatrix u, DenseMatrix v) : u_(std::move(u)), v_(std::move(v)) {
    require(u_.cols() == v_.cols(), "TangentSpace: u and v must have the same number of columns");
    const Index r = u_.cols();
    const double eu = (u_.transpose() * u_ - DenseMatrix::Identity(r, r)).norm();
    const double ev = (v_.transpose() * v_ - DenseMatrix::Identity(r, r)).norm();
    require(eu <= 1e-10 && ev <= 1e-10, "TangentSpace: columns are not orthonormal");
  }

  /// Leading r singular vectors of the factors.
  static TangentSpace from_svd(const SvdFactors& f, Index r) {
    require(r >= 0 && r <= f.k(), "TangentSpace::from_svd: rank out of range");
    return TangentSpace(f.u.leftCols(r), f.v.leftCols(r));
  }

  /// Tangent space of a matrix at its numerical rank.
  static TangentSpace of(const DenseMatrix& l) {
    const SvdFactors f = svd_full(l);
    return from_svd(f, static_cast<Index>(f.rank()));
  }

  const DenseMatrix& u() const noexcept { return u_; }
  const DenseMatrix& v() const noexcept { return v_; }
  Index rank() const noexcept { return u_.cols(); }
  Index rows() const noexcept { return u_.rows(); }
  Index cols() const noexcept { return v_.rows(); }

  /// U V^T, the "sign" of the low-rank component.
  DenseMatrix sign_matrix() const { return u_ * v_.transpose(); }

 private:
  DenseMatrix u_;
  DenseMatrix v_;
};

/// P_T(X) = U U^T X + X V V^T - U U^T X V V^T, in O(n1 n2 r).
inline DenseMatrix proj_tangent(const DenseMatrix& x, const TangentSpace& t) {
  if (x.rows() != t.rows() || x.cols() != t.cols()) throw InvalidArgument("proj_tangent: shape mismatch");
  const DenseMatrix& u = t.u();
  const DenseMatrix& v = t.v();
  const DenseMatrix utx = u.transpose() * x;  // r x n2
  const DenseMatrix xv = x * v;               // n1 x r
  return u * utx + (xv - u * (utx * v)) * v.transpose();
}

/// P_T^perp(X) = (I - U U^T) X (I - V V^T), computed as X - P_T(X).
inline DenseMatrix proj_tangent_complement(const DenseMatrix& x, const TangentSpace& t) {
  return x - proj_tangent(x, t);
}

struct EigenIterationOptions {
  double tol = 1e-9;
  int max_iters = 5000;  // cap on applications of the map
  int max_basis = 100;   // Krylov dimension before an explicit restart
  RngState fallback{0x9e3779b9, purpose::kEigenStart};
};

/// Largest |eigenvalue| of a self-adjoint linear map over n1 x n2 matrices,
/// by Lanczos iteration from `start` with full reorthogonalization and
/// explicit restarts. Converged once the Ritz residual of the extreme pair
/// is at most tol * |theta|. Throws NumericalFailure carrying the best
/// estimate when max_iters applications do not suffice.
inline double spectral_radius(const std::function<DenseMatrix(const DenseMatrix&)>& apply, DenseMatrix start,
                              const EigenIterationOptions& opts) {
  require(opts.tol > 0.0, "spectral_radius: tol must be positive");
  require(opts.max_basis >= 2, "spectral_radius: max_basis must be at least 2");
  const double nrm = start.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) return 0.0;
  DenseMatrix q = start / nrm;
  double best = 0.0;
  int applied = 0;
  while (applied < opts.max_iters) {
    std::vector<DenseMatrix> basis{q};
    std::vector<double> alpha;
    std::vector<double> beta;
    for (;;) {
      DenseMatrix w = apply(basis.back());
      ++applied;
      if (!w.allFinite()) throw NumericalFailure("spectral_radius: non-finite iterate", best);
      alpha.push_back(inner(basis.back(), w));
      for (int pass = 0; pass < 2; ++pass)
        for (const DenseMatrix& b : basis) w -= inner(b, w) * b;
      const double next = w.norm();

      const auto k = static_cast<Index>(alpha.size());
      DenseMatrix tri = DenseMatrix::Zero(k, k);
      for (Index i = 0; i < k; ++i) tri(i, i) = alpha[static_cast<std::size_t>(i)];
      for (Index i = 0; i + 1 < k; ++i) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
      const Eigen::SelfAdjointEigenSolver<DenseMatrix> ritz(tri);
      const Vector& theta = ritz.eigenvalues();
      const Index pick = std::abs(theta(0)) > std::abs(theta(k - 1)) ? 0 : k - 1;
      const double value = std::abs(theta(pick));
      const double residual = next * std::abs(ritz.eigenvectors()(k - 1, pick));
      best = value;
      if (residual <= opts.tol * value || next <= std::numeric_limits<double>::min()) return value;
      if (applied >= opts.max_iters) break;
      if (k == opts.max_basis) {
        DenseMatrix restart = DenseMatrix::Zero(q.rows(), q.cols());
        for (Index i = 0; i < k; ++i) restart += ritz.eigenvectors()(i, pick) * basis[static_cast<std::size_t>(i)];
        q = restart / restart.norm();
        break;
      }
      beta.push_back(next);
      basis.push_back(w / next);
    }
  }
  throw NumericalFailure("spectral_radius: no convergence after " + std::to_string(opts.max_iters) +
                             " applications",
                         best);
}

namespace detail {

/// Normalized all-ones matrix pushed through P_T, or a seeded Gaussian
/// (also pushed through P_T) when that vanishes.
inline DenseMatrix tangent_start(const TangentSpace& t, const RngState& fallback) {
  DenseMatrix start = proj_tangent(DenseMatrix::Ones(t.rows(), t.cols()), t);
  if (start.norm() > 1e-12 * std::sqrt(static_cast<double>(start.size()))) return start;
  return proj_tangent(gen_gaussian(fallback, t.rows(), t.cols(), 1.0), t);
}

}  // namespace detail

/// ||P_Omega P_T||, computed as the square root of the top eigenvalue of
/// X -> P_T P_Omega P_T X.
inline double op_norm_composed(const SupportMask& omega, const TangentSpace& t,
                               const EigenIterationOptions& opts = {}) {
  if (omega.rows() != t.rows() || omega.cols() != t.cols()) throw InvalidArgument("op_norm_composed: shape mismatch");
  if (omega.empty() || t.rank() == 0) return 0.0;
  auto map = [&](const DenseMatrix& x) { return proj_tangent(proj_support(proj_tangent(x, t), omega), t); };
  try {
    return std::sqrt(std::max(0.0, spectral_radius(map, detail::tangent_start(t, opts.fallback), opts)));
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(std::string("op_norm_composed: ") + e.what(), std::sqrt(std::max(0.0, e.best_estimate())));
  }
}

}  // namespace pcp
