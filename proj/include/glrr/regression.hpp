#pragma once

// Downstream regressors: ordinary least squares, ridge, and Gaussian-kernel
// epsilon-insensitive support vector regression trained by pairwise
// coordinate optimization of the dual.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "glrr/error.hpp"
#include "glrr/matrix.hpp"

namespace glrr {

struct FeatureSet {
  Matrix features;  // n x p, rows are samples
  Vector targets;   // n
};

inline void validate(const FeatureSet& data) {
  require(data.features.rows() == data.targets.size(),
          "regression: feature rows and target count differ");
  require_finite(data.features, "regression features");
  require_finite(data.targets, "regression targets");
}

struct KernelSpec {
  double gamma = 1.0;  // K(a, b) = exp(-gamma ||a - b||^2)
};

struct LinearModel {
  Vector weights;
  double intercept = 0.0;
  double ridge_alpha = 0.0;  // 0 for plain least squares
};

struct SvrModel {
  Vector dual_coeffs;  // alpha_i - alpha_i^*, one per training sample
  double bias = 0.0;
  Matrix training_features;
  KernelSpec kernel;
  double C = 1.0;
  double epsilon_tube = 0.0;
};

inline Matrix squared_distances(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "squared_distances: dimension mismatch");
  Matrix d2(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      d2(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return d2;
}

inline Matrix kernel_from_squared_distances(const Matrix& d2, double gamma) {
  return ((-gamma) * d2.array()).exp().matrix();
}

inline Matrix gaussian_kernel(const Matrix& a, const Matrix& b,
                              double gamma) {
  return kernel_from_squared_distances(squared_distances(a, b), gamma);
}

// Centered least squares; rank deficiency falls back to the minimum-norm
// solution, so constant targets give zero weights and a mean intercept.
inline LinearModel fit_ols(const FeatureSet& data) {
  validate(data);
  require(data.targets.size() >= 2, "fit_ols: need at least two samples");
  const Vector feature_means = data.features.colwise().mean();
  const double target_mean = data.targets.mean();
  const Matrix centered =
      data.features.rowwise() - feature_means.transpose();
  const Vector centered_targets = data.targets.array() - target_mean;
  LinearModel model;
  model.weights =
      centered.completeOrthogonalDecomposition().solve(centered_targets);
  model.intercept = target_mean - feature_means.dot(model.weights);
  model.ridge_alpha = 0.0;
  return model;
}

// l2-penalized least squares with an unpenalized intercept.
inline LinearModel fit_ridge(const FeatureSet& data, double alpha) {
  validate(data);
  require(data.targets.size() >= 2, "fit_ridge: need at least two samples");
  require(alpha > 0.0, "fit_ridge: alpha must be positive");
  const Vector feature_means = data.features.colwise().mean();
  const double target_mean = data.targets.mean();
  const Matrix centered =
      data.features.rowwise() - feature_means.transpose();
  const Vector centered_targets = data.targets.array() - target_mean;
  Matrix gram = centered.transpose() * centered;
  gram.diagonal().array() += alpha;
  LinearModel model;
  model.weights = Eigen::LLT<Matrix>(gram).solve(
      centered.transpose() * centered_targets);
  model.intercept = target_mean - feature_means.dot(model.weights);
  model.ridge_alpha = alpha;
  return model;
}

namespace detail {

struct SvrDual {
  Vector beta;
  double bias = 0.0;
  double final_violation = 0.0;
};

// Epsilon-SVR dual on a precomputed kernel matrix, as the 2n-variable
// box-constrained QP
//
//   min  1/2 a^T Q a + c^T a,   Q_pq = y_p y_q K(s(p), s(q)),
//        c_p = eps - y_p t_{s(p)},  y_p = +1 for p < n, -1 otherwise,
//   s.t. sum_p y_p a_p = 0,  0 <= a_p <= C,
//
// optimized over maximal-violating pairs until the KKT gap m - M drops
// below tol. beta = a[0..n) - a[n..2n) and the bias comes from the free
// variables (midpoint of the violating bounds when none are free).
inline SvrDual solve_svr_dual(const Matrix& kernel, const Vector& targets,
                              double C, double eps_tube, int max_updates,
                              double tol = 1e-6) {
  const int n = static_cast<int>(targets.size());
  const int nn = 2 * n;
  Vector a = Vector::Zero(nn);
  Vector g(nn);
  for (int p = 0; p < n; ++p) g(p) = eps_tube - targets(p);
  for (int p = n; p < nn; ++p) g(p) = eps_tube + targets(p - n);
  const auto sign = [n](int p) { return p < n ? 1.0 : -1.0; };
  const auto sample = [n](int p) { return p < n ? p : p - n; };

  int updates = 0;
  double m = 0.0, M = 0.0;
  while (true) {
    int i = -1, j = -1;
    m = -std::numeric_limits<double>::infinity();
    M = std::numeric_limits<double>::infinity();
    for (int p = 0; p < nn; ++p) {
      const double y = sign(p);
      const double v = -y * g(p);
      const bool in_up = y > 0.0 ? a(p) < C : a(p) > 0.0;
      const bool in_low = y > 0.0 ? a(p) > 0.0 : a(p) < C;
      if (in_up && v > m) {
        m = v;
        i = p;
      }
      if (in_low && v < M) {
        M = v;
        j = p;
      }
    }
    if (i < 0 || j < 0 || m - M < tol) break;
    if (updates >= max_updates) {
      throw NumericalFailure(
          "svr: pairwise optimization hit the update cap with KKT "
          "violation " +
          std::to_string(m - M));
    }

    const int si = sample(i), sj = sample(j);
    double curvature =
        kernel(si, si) + kernel(sj, sj) - 2.0 * kernel(si, sj);
    if (curvature <= 0.0) curvature = 1e-12;
    const double yi = sign(i), yj = sign(j);
    double step = (m - M) / curvature;
    step = std::min(step, yi > 0.0 ? C - a(i) : a(i));
    step = std::min(step, yj > 0.0 ? a(j) : C - a(j));
    const double old_i = a(i), old_j = a(j);
    a(i) = std::clamp(a(i) + yi * step, 0.0, C);
    a(j) = std::clamp(a(j) - yj * step, 0.0, C);
    const double delta_i = yi * (a(i) - old_i);
    const double delta_j = yj * (a(j) - old_j);
    for (int p = 0; p < nn; ++p) {
      g(p) += sign(p) *
              (delta_i * kernel(sample(p), si) + delta_j * kernel(sample(p), sj));
    }
    ++updates;
  }

  SvrDual result;
  result.final_violation = m - M;
  double bias_sum = 0.0;
  int free_count = 0;
  for (int p = 0; p < nn; ++p) {
    if (a(p) > 0.0 && a(p) < C) {
      bias_sum += -sign(p) * g(p);
      ++free_count;
    }
  }
  if (free_count > 0) {
    result.bias = bias_sum / free_count;
  } else if (std::isfinite(m) && std::isfinite(M)) {
    result.bias = 0.5 * (m + M);
  } else {
    result.bias = 0.0;
  }
  result.beta = a.head(n) - a.tail(n);
  return result;
}

}  // namespace detail

inline SvrModel fit_svr(const FeatureSet& data, double C,
                        const KernelSpec& kernel, double epsilon_tube,
                        int max_updates = 100000) {
  validate(data);
  require(data.targets.size() >= 2, "fit_svr: need at least two samples");
  require(C > 0.0, "fit_svr: C must be positive");
  require(kernel.gamma > 0.0, "fit_svr: kernel gamma must be positive");
  require(epsilon_tube >= 0.0, "fit_svr: tube width must be nonnegative");
  const Matrix k =
      gaussian_kernel(data.features, data.features, kernel.gamma);
  const auto dual =
      detail::solve_svr_dual(k, data.targets, C, epsilon_tube, max_updates);
  SvrModel model;
  model.dual_coeffs = dual.beta;
  model.bias = dual.bias;
  model.training_features = data.features;
  model.kernel = kernel;
  model.C = C;
  model.epsilon_tube = epsilon_tube;
  return model;
}

inline Vector predict(const LinearModel& model, const Matrix& features) {
  require(features.cols() == model.weights.size(),
          "predict: feature dimension differs from the fitted model");
  require_finite(features, "predict features");
  return (features * model.weights).array() + model.intercept;
}

inline Vector predict(const SvrModel& model, const Matrix& features) {
  require(features.cols() == model.training_features.cols(),
          "predict: feature dimension differs from the fitted model");
  require_finite(features, "predict features");
  const Matrix k =
      gaussian_kernel(features, model.training_features, model.kernel.gamma);
  return (k * model.dual_coeffs).array() + model.bias;
}

}  // namespace glrr
