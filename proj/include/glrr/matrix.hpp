// Matrix aliases and validation helpers used across the library.
//
// Everything is dense, double precision, value-semantic. Data matrices
// follow the d x n layout: one column per sample, one row per band.
#pragma once

#include <Eigen/Dense>

#include <string>

#include "glrr/error.hpp"

namespace glrr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidInput(msg);
}

inline void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite())
    throw InvalidInput(std::string(name) + " contains non-finite entries");
}

inline void require_finite(const Vector& v, const char* name) {
  if (!v.allFinite())
    throw InvalidInput(std::string(name) + " contains non-finite entries");
}

}  // namespace glrr
