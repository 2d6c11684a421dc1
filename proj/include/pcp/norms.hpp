#pragma once

#include "pcp/core.hpp"
#include "pcp/svd.hpp"

namespace pcp {

struct MatrixNorms {
  double operator_norm = 0.0;  // largest singular value
  double frobenius = 0.0;
  double nuclear = 0.0;  // sum of singular values
  double l1 = 0.0;       // sum of |m_ij|
  double linf = 0.0;     // max |m_ij|
};

inline double norm_operator(const DenseMatrix& m) {
  if (m.size() == 0) return 0.0;
  const Vector s = svd_full(m).sigma;
  return s.size() > 0 ? s(0) : 0.0;
}

inline double norm_nuclear(const DenseMatrix& m) { return m.size() == 0 ? 0.0 : svd_full(m).sigma.sum(); }

inline MatrixNorms norms(const DenseMatrix& m) {
  if (!m.allFinite()) throw InvalidArgument("norms: matrix has non-finite entries");
  MatrixNorms out;
  out.frobenius = norm_fro(m);
  out.l1 = norm_l1(m);
  out.linf = norm_linf(m);
  if (m.size() > 0) {
    const Vector s = svd_full(m).sigma;
    out.operator_norm = s.size() > 0 ? s(0) : 0.0;
    out.nuclear = s.sum();
  }
  return out;
}

}  // namespace pcp
