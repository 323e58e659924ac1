#pragma once

// Proximal operators for the nuclear norm and the column-wise l2,1 norm,
// plus the matrix norms used by the solver and its termination tests.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "glrr/error.hpp"
#include "glrr/matrix.hpp"

namespace glrr {

// Soft-thresholds the singular values of m by tau: U max(S - tau, 0) V^T.
// This is the proximal map of tau * ||.||_* at m.
inline Matrix svt(const Matrix& m, double tau) {
  require(tau >= 0.0, "svt: threshold must be nonnegative");
  require_finite(m, "svt input");
  if (m.size() == 0) return m;
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "svt: SVD failed on a " << m.rows() << "x" << m.cols()
        << " matrix (solver info " << static_cast<int>(svd.info()) << ")";
    throw NumericalFailure(msg.str());
  }
  const Vector shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

// Column-wise shrinkage: scales column q by (||q|| - tau)/||q|| when
// ||q|| > tau, zeroes it otherwise. Proximal map of tau * ||.||_{2,1}.
// With tau = 0 the scale factor is exactly 1 and the input passes through
// unchanged.
inline Matrix l21_shrink(const Matrix& q, double tau) {
  require(tau >= 0.0, "l21_shrink: threshold must be nonnegative");
  require_finite(q, "l21_shrink input");
  Matrix out = q;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double nrm = q.col(j).norm();
    if (nrm > tau) {
      out.col(j) *= (nrm - tau) / nrm;
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

// Sum of column l2 norms.
inline double l21_norm(const Matrix& m) {
  require_finite(m, "l21_norm input");
  double total = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) total += m.col(j).norm();
  return total;
}

// Largest absolute entry; zero for empty matrices.
inline double inf_norm(const Matrix& m) {
  require_finite(m, "inf_norm input");
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Sum of singular values.
inline double nuclear_norm(const Matrix& m) {
  require_finite(m, "nuclear_norm input");
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  if (svd.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "nuclear_norm: SVD failed on a " << m.rows() << "x" << m.cols()
        << " matrix (solver info " << static_cast<int>(svd.info()) << ")";
    throw NumericalFailure(msg.str());
  }
  return svd.singularValues().sum();
}

// Number of singular values above 1e-14 times the largest one.
inline int numerical_rank(const Matrix& m) {
  require_finite(m, "numerical_rank input");
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cutoff = 1e-14 * s(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++rank;
  return rank;
}

}  // namespace glrr
