#pragma once

// Evaluation metrics: root-mean-square error and Pearson correlation.

#include <algorithm>
#include <cmath>

#include "glrr/error.hpp"
#include "glrr/matrix.hpp"

namespace glrr {

inline double rmse(const Vector& pred, const Vector& truth) {
  require(pred.size() == truth.size(), "rmse: length mismatch");
  require(pred.size() >= 1, "rmse: need at least one value");
  require_finite(pred, "rmse predictions");
  require_finite(truth, "rmse truth");
  return std::sqrt((pred - truth).squaredNorm() /
                   static_cast<double>(pred.size()));
}

// Sample correlation; a constant vector has no correlation and is reported
// as an error, never as 0.
inline double pearson_r(const Vector& pred, const Vector& truth) {
  require(pred.size() == truth.size(), "pearson_r: length mismatch");
  require(pred.size() >= 2, "pearson_r: need at least two values");
  require_finite(pred, "pearson_r predictions");
  require_finite(truth, "pearson_r truth");
  const Vector a = pred.array() - pred.mean();
  const Vector b = truth.array() - truth.mean();
  const double sa = a.norm();
  const double sb = b.norm();
  if (sa == 0.0 || sb == 0.0) {
    throw UndefinedCorrelation(
        "pearson_r: correlation is undefined for a constant vector");
  }
  return std::clamp(a.dot(b) / (sa * sb), -1.0, 1.0);
}

}  // namespace glrr
