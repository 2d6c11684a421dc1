#pragma once

// Full and truncated singular value decompositions.
//
// Every routine returns factors in a canonical sign: within each singular
// pair the entry of largest magnitude in the left vector is nonnegative
// (first such entry on ties), so factor comparisons are deterministic.

#include "pcp/core.hpp"
#include "pcp/rng.hpp"

#include <Eigen/SVD>

namespace pcp {

/// Thin SVD m = u * diag(sigma) * v^T with k singular triplets.
struct SvdFactors {
  DenseMatrix u;  // n1 x k, orthonormal columns
  Vector sigma;   // nonincreasing, >= 0
  DenseMatrix v;  // n2 x k, orthonormal columns

  Index k() const noexcept { return sigma.size(); }

  DenseMatrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }

  /// Numerical rank under the library-wide tolerance rule.
  std::size_t rank() const { return numerical_rank(sigma, u.rows(), v.rows()); }
};

namespace detail {

inline void canonicalize_signs(SvdFactors& f) {
  for (Index c = 0; c < f.u.cols(); ++c) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < f.u.rows(); ++i) {
      const double a = std::abs(f.u(i, c));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (f.u.rows() > 0 && f.u(best, c) < 0.0) {
      f.u.col(c) *= -1.0;
      f.v.col(c) *= -1.0;
    }
  }
}

inline void check_factors(const SvdFactors& f, const char* where) {
  if (!f.u.allFinite() || !f.v.allFinite() || !f.sigma.allFinite()) {
    throw NumericalFailure(std::string(where) + ": non-finite singular factors");
  }
}

/// Fills `basis.col(col)` with a unit vector orthogonal to the first `col`
/// columns. Returns false if the space is exhausted.
inline bool fresh_orthogonal_column(DenseMatrix& basis, Index col, Rng& rng) {
  const Index dim = basis.rows();
  if (col >= dim) return false;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Vector w(dim);
    for (Index i = 0; i < dim; ++i) w(i) = rng.normal();
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(col) * (basis.leftCols(col).transpose() * w);
    }
    const double nw = w.norm();
    if (nw > 1e-8) {
      basis.col(col) = w / nw;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Full thin SVD with k = min(rows, cols).
inline SvdFactors svd_full(const DenseMatrix& m) {
  if (!m.allFinite()) throw InvalidArgument("svd_full: matrix has non-finite entries");
  SvdFactors f;
  if (m.size() == 0) {
    f.u = DenseMatrix(m.rows(), 0);
    f.v = DenseMatrix(m.cols(), 0);
    return f;
  }
  Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalFailure("svd_full: SVD did not converge");
  f.u = svd.matrixU();
  f.sigma = svd.singularValues();
  f.v = svd.matrixV();
  detail::check_factors(f, "svd_full");
  detail::canonicalize_signs(f);
  return f;
}

/// Options for the Lanczos-based truncated SVD.
struct TruncatedSvdOptions {
  /// Ritz triplets are accepted once their residual is below tol * sigma_1.
  double tol = 1e-12;
  /// Seed of the deterministic start vector.
  RngState start{0x5eed, purpose::kLanczosStart};
};

/// Top-k singular triplets by Golub-Kahan-Lanczos bidiagonalization with
/// full reorthogonalization. The Krylov dimension grows until every
/// requested Ritz triplet has converged; at full dimension the
/// factorization is exact.
inline SvdFactors svd_truncated(const DenseMatrix& m, Index k, const TruncatedSvdOptions& opts = {}) {
  const Index p = std::min(m.rows(), m.cols());
  if (k < 1 || k > p) throw InvalidArgument("svd_truncated: need 1 <= k <= min(rows, cols)");
  if (!m.allFinite()) throw InvalidArgument("svd_truncated: matrix has non-finite entries");

  // Work on the orientation with cols <= rows so the right Krylov basis can fill its space.
  const bool transposed = m.rows() < m.cols();
  const DenseMatrix& a = m;
  auto apply = [&](const Vector& x) -> Vector { return transposed ? Vector(a.transpose() * x) : Vector(a * x); };
  auto apply_t = [&](const Vector& y) -> Vector { return transposed ? Vector(a * y) : Vector(a.transpose() * y); };
  const Index nrow = transposed ? m.cols() : m.rows();
  const Index ncol = p;

  const double anorm = m.norm();
  SvdFactors out;
  if (anorm == 0.0) {
    out.sigma = Vector::Zero(k);
    out.u = DenseMatrix::Identity(m.rows(), k);
    out.v = DenseMatrix::Identity(m.cols(), k);
    return out;
  }
  const double tiny = static_cast<double>(std::max(nrow, ncol)) * std::numeric_limits<double>::epsilon() * anorm;

  Rng rng(opts.start);
  DenseMatrix ubasis(nrow, ncol);
  DenseMatrix vbasis(ncol, ncol);
  Vector alpha = Vector::Zero(ncol);
  Vector beta = Vector::Zero(ncol);

  detail::fresh_orthogonal_column(vbasis, 0, rng);

  Index target = std::min(p, std::max<Index>(2 * k, k + 8));
  const Index step = std::max<Index>(8, k / 2);
  Index d = 0;
  for (;;) {
    // Extend the bidiagonalization to `target` steps.
    for (; d < target; ++d) {
      Vector uj = apply(vbasis.col(d));
      if (d > 0) uj -= beta(d - 1) * ubasis.col(d - 1);
      for (int pass = 0; pass < 2; ++pass) uj -= ubasis.leftCols(d) * (ubasis.leftCols(d).transpose() * uj);
      double aj = uj.norm();
      if (aj <= tiny) {
        aj = 0.0;
        if (!detail::fresh_orthogonal_column(ubasis, d, rng)) {
          throw NumericalFailure("svd_truncated: left Krylov basis exhausted");
        }
      } else {
        ubasis.col(d) = uj / aj;
      }
      alpha(d) = aj;

      if (d + 1 < ncol) {
        Vector vn = apply_t(ubasis.col(d)) - aj * vbasis.col(d);
        for (int pass = 0; pass < 2; ++pass) vn -= vbasis.leftCols(d + 1) * (vbasis.leftCols(d + 1).transpose() * vn);
        double bj = vn.norm();
        if (bj <= tiny) {
          bj = 0.0;
          if (!detail::fresh_orthogonal_column(vbasis, d + 1, rng)) {
            throw NumericalFailure("svd_truncated: right Krylov basis exhausted");
          }
        } else {
          vbasis.col(d + 1) = vn / bj;
        }
        beta(d) = bj;
      } else {
        beta(d) = 0.0;
      }
    }

    DenseMatrix bidiag = DenseMatrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
      bidiag(i, i) = alpha(i);
      if (i + 1 < d) bidiag(i, i + 1) = beta(i);
    }
    Eigen::JacobiSVD<DenseMatrix> small(bidiag, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& s = small.singularValues();
    const double coupling = (d < ncol) ? beta(d - 1) : 0.0;
    bool converged = true;
    for (Index i = 0; i < k && converged; ++i) {
      const double resid = std::abs(coupling * small.matrixU()(d - 1, i));
      if (resid > opts.tol * std::max(s(0), tiny)) converged = false;
    }
    if (converged || d == ncol) {
      DenseMatrix left = ubasis.leftCols(d) * small.matrixU().leftCols(k);
      DenseMatrix right = vbasis.leftCols(d) * small.matrixV().leftCols(k);
      out.sigma = s.head(k);
      if (transposed) {
        out.u = std::move(right);
        out.v = std::move(left);
      } else {
        out.u = std::move(left);
        out.v = std::move(right);
      }
      break;
    }
    target = std::min(ncol, d + step);
  }
  detail::check_factors(out, "svd_truncated");
  detail::canonicalize_signs(out);
  return out;
}

}  // namespace pcp
