#pragma once

// Basic types shared by every module: the dense matrix carrier, support
// masks, error types and the five matrix norms.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pcp {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs violate a precondition (shape mismatch, out-of-range parameter).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed matrix or mask file. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An iterative numerical kernel failed (non-convergence, NaN/Inf output).
class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& what, double best_estimate = std::numeric_limits<double>::quiet_NaN())
      : Error(what), best_estimate_(best_estimate) {}
  /// Last iterate of the failed computation, when it has a scalar result.
  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

inline bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

inline void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(where) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}

/// Frobenius inner product <A, B> = trace(A^T B).
inline double inner(const DenseMatrix& a, const DenseMatrix& b) { return a.cwiseProduct(b).sum(); }

inline double norm_l1(const DenseMatrix& m) { return m.cwiseAbs().sum(); }
inline double norm_linf(const DenseMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
inline double norm_fro(const DenseMatrix& m) { return m.norm(); }

/// Number of singular values counted as nonzero: sigma_i > max(n1, n2) * eps * sigma_1.
inline std::size_t numerical_rank(const Vector& sigma, Index n1, Index n2) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double cut = static_cast<double>(std::max(n1, n2)) * std::numeric_limits<double>::epsilon() * sigma(0);
  std::size_t r = 0;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cut) ++r;
  }
  return r;
}

/// A set of zero-based (row, col) index pairs over a rows x cols grid.
/// Entries are kept sorted lexicographically and duplicate-free.
class SupportMask {
 public:
  using Entry = std::pair<Index, Index>;

  SupportMask() = default;
  SupportMask(Index rows, Index cols) : rows_(rows), cols_(cols) {
    require(rows >= 0 && cols >= 0, "SupportMask: negative shape");
  }

  /// Builds from arbitrary pairs. Throws on out-of-range or duplicate pairs.
  static SupportMask from_entries(Index rows, Index cols, std::vector<Entry> entries) {
    SupportMask m(rows, cols);
    std::sort(entries.begin(), entries.end());
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto [i, j] = entries[k];
      if (i < 0 || i >= rows || j < 0 || j >= cols) {
        throw InvalidArgument("SupportMask: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") out of range");
      }
      if (k > 0 && entries[k - 1] == entries[k]) {
        throw InvalidArgument("SupportMask: duplicate entry (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
    m.entries_ = std::move(entries);
    return m;
  }

  static SupportMask full(Index rows, Index cols) {
    SupportMask m(rows, cols);
    m.entries_.reserve(static_cast<std::size_t>(rows * cols));
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m.entries_.emplace_back(i, j);
    return m;
  }

  /// Entries where `indicator` is nonzero.
  static SupportMask from_indicator(const DenseMatrix& indicator) {
    SupportMask m(indicator.rows(), indicator.cols());
    for (Index i = 0; i < indicator.rows(); ++i)
      for (Index j = 0; j < indicator.cols(); ++j)
        if (indicator(i, j) != 0.0) m.entries_.emplace_back(i, j);
    return m;
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  bool contains(Index i, Index j) const {
    return std::binary_search(entries_.begin(), entries_.end(), Entry{i, j});
  }

  /// 0/1 indicator matrix.
  DenseMatrix indicator() const {
    DenseMatrix out = DenseMatrix::Zero(rows_, cols_);
    for (const auto& [i, j] : entries_) out(i, j) = 1.0;
    return out;
  }

  SupportMask complement() const {
    SupportMask m(rows_, cols_);
    m.entries_.reserve(static_cast<std::size_t>(rows_ * cols_) - entries_.size());
    auto it = entries_.begin();
    for (Index i = 0; i < rows_; ++i) {
      for (Index j = 0; j < cols_; ++j) {
        if (it != entries_.end() && it->first == i && it->second == j) {
          ++it;
        } else {
          m.entries_.emplace_back(i, j);
        }
      }
    }
    return m;
  }

  friend bool operator==(const SupportMask&, const SupportMask&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Entry> entries_;
};

}  // namespace pcp
