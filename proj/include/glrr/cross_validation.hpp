#pragma once

// Exhaustive grid search scored by 5-fold cross-validated RMSE, plus the
// seeded fold partition and the log-spaced parameter lattice shared by all
// tuned hyperparameters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <vector>

#include "glrr/error.hpp"
#include "glrr/matrix.hpp"
#include "glrr/metrics.hpp"
#include "glrr/regression.hpp"
#include "glrr/rng.hpp"

namespace glrr {

// {10^lo, ..., 10^hi}, ascending.
inline std::vector<double> log_lattice(int lo = -3, int hi = 3) {
  require(lo <= hi, "log_lattice: empty range");
  std::vector<double> values;
  for (int i = lo; i <= hi; ++i) values.push_back(std::pow(10.0, i));
  return values;
}

// Seeded random partition of {0..n-1} into near-equal parts; the first
// n % folds parts carry one extra sample. Indices inside each fold are
// sorted.
inline std::vector<std::vector<int>> cv_folds(int n, int folds,
                                              uint64_t seed) {
  require(folds >= 2, "cv_folds: need at least two folds");
  require(n >= folds, "cv_folds: every fold needs at least one sample");
  Rng rng(seed);
  const auto perm = rng.permutation(n);
  std::vector<std::vector<int>> out(folds);
  const int base = n / folds;
  const int extra = n % folds;
  int pos = 0;
  for (int f = 0; f < folds; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    out[f].assign(perm.begin() + pos, perm.begin() + pos + size);
    pos += size;
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

inline std::vector<int> fold_complement(
    const std::vector<std::vector<int>>& folds, int held_out) {
  std::vector<int> train;
  for (int f = 0; f < static_cast<int>(folds.size()); ++f)
    if (f != held_out)
      train.insert(train.end(), folds[f].begin(), folds[f].end());
  std::sort(train.begin(), train.end());
  return train;
}

struct GridSearchResult {
  std::vector<double> params;   // chosen value per axis
  std::vector<size_t> indices;  // lattice position per axis
  double score = 0.0;           // mean validation RMSE
};

// Visits every cell of the Cartesian lattice in lexicographic order (first
// axis slowest) and keeps the first strict improvement, so ties resolve to
// the smallest parameter values. score_fold(params, train_idx, val_idx)
// returns the validation RMSE of one fold.
template <typename ScoreFold>
GridSearchResult grid_search_cv(const std::vector<std::vector<double>>& grid,
                                int n, int folds, uint64_t seed,
                                ScoreFold&& score_fold) {
  require(!grid.empty(), "grid_search_cv: no parameter axes");
  for (const auto& axis : grid)
    require(!axis.empty(), "grid_search_cv: empty parameter axis");
  const auto fold_sets = cv_folds(n, folds, seed);
  std::vector<std::vector<int>> train_sets(fold_sets.size());
  for (size_t f = 0; f < fold_sets.size(); ++f)
    train_sets[f] = fold_complement(fold_sets, static_cast<int>(f));

  const size_t axes = grid.size();
  std::vector<size_t> index(axes, 0);
  std::vector<double> params(axes);
  GridSearchResult best;
  bool have_best = false;
  while (true) {
    for (size_t ax = 0; ax < axes; ++ax) params[ax] = grid[ax][index[ax]];
    double total = 0.0;
    for (size_t f = 0; f < fold_sets.size(); ++f)
      total += score_fold(params, train_sets[f], fold_sets[f]);
    const double score = total / static_cast<double>(fold_sets.size());
    if (!have_best || score < best.score) {
      best.params = params;
      best.indices = index;
      best.score = score;
      have_best = true;
    }
    size_t ax = axes;
    while (ax > 0) {
      --ax;
      if (++index[ax] < grid[ax].size()) break;
      index[ax] = 0;
      if (ax == 0) return best;
    }
  }
}

namespace detail {

inline Matrix take_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

inline Vector take(const Vector& v, const std::vector<int>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

inline Matrix take_block(const Matrix& m, const std::vector<int>& rows,
                         const std::vector<int>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(cols.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(rows[i], cols[j]);
  return out;
}

}  // namespace detail

// Gamma/C search specialized for the Gaussian-kernel regressor: squared
// distances are computed once and kernel blocks are rebuilt per gamma, not
// per cell, which leaves the scores bit-identical to the generic search.
// A cell whose dual solve hits the update cap is unselectable and is skipped;
// the failure only propagates when every cell is unselectable.
inline GridSearchResult svr_grid_search_cv(
    const FeatureSet& data, const std::vector<double>& gamma_grid,
    const std::vector<double>& c_grid, int folds, uint64_t seed,
    double epsilon_tube, int max_updates = 100000) {
  validate(data);
  require(!gamma_grid.empty() && !c_grid.empty(),
          "svr_grid_search_cv: empty parameter axis");
  const int n = static_cast<int>(data.targets.size());
  const Matrix d2 = squared_distances(data.features, data.features);
  const auto fold_sets = cv_folds(n, folds, seed);
  std::vector<std::vector<int>> train_sets(fold_sets.size());
  for (size_t f = 0; f < fold_sets.size(); ++f)
    train_sets[f] = fold_complement(fold_sets, static_cast<int>(f));

  GridSearchResult best;
  bool have_best = false;
  std::exception_ptr first_failure;
  for (size_t gi = 0; gi < gamma_grid.size(); ++gi) {
    const double gamma = gamma_grid[gi];
    std::vector<Matrix> train_kernels(fold_sets.size());
    std::vector<Matrix> val_kernels(fold_sets.size());
    std::vector<Vector> train_targets(fold_sets.size());
    std::vector<Vector> val_targets(fold_sets.size());
    for (size_t f = 0; f < fold_sets.size(); ++f) {
      train_kernels[f] = kernel_from_squared_distances(
          detail::take_block(d2, train_sets[f], train_sets[f]), gamma);
      val_kernels[f] = kernel_from_squared_distances(
          detail::take_block(d2, fold_sets[f], train_sets[f]), gamma);
      train_targets[f] = detail::take(data.targets, train_sets[f]);
      val_targets[f] = detail::take(data.targets, fold_sets[f]);
    }
    for (size_t ci = 0; ci < c_grid.size(); ++ci) {
      const double c = c_grid[ci];
      double total = 0.0;
      try {
        for (size_t f = 0; f < fold_sets.size(); ++f) {
          const auto dual = detail::solve_svr_dual(
              train_kernels[f], train_targets[f], c, epsilon_tube, max_updates);
          const Vector pred =
              (val_kernels[f] * dual.beta).array() + dual.bias;
          total += rmse(pred, val_targets[f]);
        }
      } catch (const NumericalFailure&) {
        if (!first_failure) first_failure = std::current_exception();
        continue;
      }
      const double score = total / static_cast<double>(fold_sets.size());
      if (!have_best || score < best.score) {
        best.params = {gamma, c};
        best.indices = {gi, ci};
        best.score = score;
        have_best = true;
      }
    }
  }
  if (!have_best) std::rethrow_exception(first_failure);
  return best;
}

}  // namespace glrr
