#pragma once

// Linearized ADMM for the graph-regularized low-rank representation
// problem
//
//   min ||Z||_* + lambda ||E||_{2,1} + (beta/2) tr(Z L Z^T)
//   s.t. X = X Z + E
//
// with splitting variable J for the nuclear-norm term and multipliers
// Y1 (Z = J) and Y2 (X = XZ + E). The Z subproblem is linearized around
// the previous iterate Zk with constant ||X||_F^2.

#include <algorithm>
#include <string>
#include <vector>

#include "glrr/error.hpp"
#include "glrr/graph.hpp"
#include "glrr/matrix.hpp"
#include "glrr/prox.hpp"

namespace glrr {

struct GlrrConfig {
  double lambda = 1.0;   // weight of the column-sparse noise term
  double beta = 0.0;     // weight of the graph smoothness term
  double mu0 = 1e-6;     // initial penalty
  double mu_max = 1e11;  // penalty cap
  double rho = 1.1;      // penalty growth factor
  double eps = 1e-11;    // inf-norm tolerance on both residuals
  int max_iter = 1000;
};

inline void validate(const GlrrConfig& config) {
  require(config.lambda > 0.0, "solver: lambda must be positive");
  require(config.beta >= 0.0, "solver: beta must be nonnegative");
  require(config.mu0 > 0.0, "solver: mu0 must be positive");
  require(config.mu0 <= config.mu_max, "solver: mu0 must not exceed mu_max");
  require(config.rho > 1.0, "solver: rho must exceed 1");
  require(config.eps > 0.0, "solver: eps must be positive");
  require(config.max_iter >= 1, "solver: max_iter must be at least 1");
}

struct AdmmState {
  Matrix Z;   // n x n representation iterate
  Matrix J;   // n x n nuclear-norm splitting variable
  Matrix E;   // d x n column-sparse noise iterate
  Matrix Y1;  // n x n multiplier for Z = J
  Matrix Y2;  // d x n multiplier for X = XZ + E
  Matrix Zk;  // n x n linearization anchor (previous Z)
  double mu = 0.0;
};

struct IterationRecord {
  double constraint_residual;  // ||X - XZ - E||_inf
  double coupling_residual;    // ||Z - J||_inf
  double mu;                   // penalty used during the iteration
};

struct GlrrSolution {
  Matrix Z;
  Matrix E;
  int iterations = 0;
  std::vector<IterationRecord> history;
  bool converged = false;
};

inline AdmmState initial_state(const Matrix& X, const GlrrConfig& config) {
  const Eigen::Index d = X.rows();
  const Eigen::Index n = X.cols();
  AdmmState state;
  state.Z = Matrix::Zero(n, n);
  state.J = Matrix::Zero(n, n);
  state.E = Matrix::Zero(d, n);
  state.Y1 = Matrix::Zero(n, n);
  state.Y2 = Matrix::Zero(d, n);
  state.Zk = Matrix::Zero(n, n);
  state.mu = config.mu0;
  return state;
}

// J = svt(Z + Y1/mu, 1/mu).
inline Matrix update_J(const AdmmState& state) {
  return svt(state.Z + state.Y1 / state.mu, 1.0 / state.mu);
}

// E = l21_shrink(X - XZ - Y2/mu, lambda/mu), with Z the iterate from the
// previous round (J has already moved when this runs).
inline Matrix update_E(const AdmmState& state, const Matrix& X,
                       double lambda) {
  return l21_shrink(X - X * state.Z - state.Y2 / state.mu,
                    lambda / state.mu);
}

// Z solves
//   Z (beta L + mu (||X||_F^2 + 1) I) =
//     mu ||X||_F^2 Zk - mu X^T X Zk - mu X^T E + mu X^T X - X^T Y2
//     + mu J - Y1
// against the SPD system matrix via Cholesky. The right-hand side never
// divides by ||X||_F^2, so X = 0 is a valid input.
inline Matrix update_Z(const AdmmState& state, const Matrix& X,
                       const Laplacian& L, double beta) {
  const double mu = state.mu;
  const double c = X.squaredNorm();
  const Matrix Xt = X.transpose();
  const Matrix XtX = Xt * X;
  const Matrix numerator = mu * c * state.Zk - mu * XtX * state.Zk -
                           mu * Xt * state.E + mu * XtX - Xt * state.Y2 +
                           mu * state.J - state.Y1;
  Matrix system = beta * L.matrix;
  system.diagonal().array() += mu * (c + 1.0);
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure(
        "update_Z: Cholesky factorization of the system matrix failed");
  }
  return llt.solve(numerator.transpose()).transpose();
}

namespace detail {

inline bool state_is_finite(const AdmmState& state) {
  return state.Z.allFinite() && state.J.allFinite() && state.E.allFinite() &&
         state.Y1.allFinite() && state.Y2.allFinite();
}

}  // namespace detail

// One full round: J, E, Z in that order, then both multipliers with the
// penalty in force during the round, then the penalty growth and the
// anchor shift.
inline AdmmState admm_step(const AdmmState& state, const Matrix& X,
                           const Laplacian& L, const GlrrConfig& config,
                           int iteration = 0) {
  AdmmState next = state;
  next.J = update_J(state);
  next.E = update_E(state, X, config.lambda);
  next.Z = update_Z(next, X, L, config.beta);
  next.Y1 = state.Y1 + state.mu * (next.Z - next.J);
  next.Y2 = state.Y2 + state.mu * (X * next.Z + next.E - X);
  next.mu = std::min(config.rho * state.mu, config.mu_max);
  next.Zk = next.Z;
  if (!detail::state_is_finite(next)) {
    throw NumericalFailure(
        "admm_step: iterate became non-finite at iteration " +
        std::to_string(iteration));
  }
  return next;
}

// Runs admm_step from the all-zero start until both residuals drop below
// eps or the iteration cap is hit; a capped run comes back flagged, not
// thrown.
inline GlrrSolution solve(const Matrix& X, const Laplacian& L,
                          const GlrrConfig& config) {
  validate(config);
  require(X.cols() >= 2, "solve: need at least two samples");
  require(L.matrix.rows() == X.cols() && L.matrix.cols() == X.cols(),
          "solve: Laplacian size must match the sample count");
  require_finite(X, "solve data matrix");

  AdmmState state = initial_state(X, config);
  GlrrSolution solution;
  solution.history.reserve(static_cast<size_t>(config.max_iter));
  for (int it = 1; it <= config.max_iter; ++it) {
    const double mu_used = state.mu;
    state = admm_step(state, X, L, config, it);
    const double constraint = inf_norm(X - X * state.Z - state.E);
    const double coupling = inf_norm(state.Z - state.J);
    solution.history.push_back({constraint, coupling, mu_used});
    solution.iterations = it;
    if (constraint < config.eps && coupling < config.eps) {
      solution.converged = true;
      break;
    }
  }
  solution.Z = state.Z;
  solution.E = state.E;
  return solution;
}

}  // namespace glrr
