#pragma once

// Heat-kernel k-nearest-neighbor affinity graph over scalar baseline
// retrievals, and the combinatorial Laplacian L = D - W built from it.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <utility>
#include <vector>

#include "glrr/error.hpp"
#include "glrr/matrix.hpp"

namespace glrr {

struct GraphConfig {
  int k = 5;
  double sigma = 0.0;  // bandwidth; 0 picks it from the data
};

struct AffinityGraph {
  Matrix weights;  // symmetric, zero diagonal, entries in [0, 1]
  double sigma = 0.0;
  int size() const { return static_cast<int>(weights.rows()); }
};

struct Laplacian {
  Matrix matrix;
  Vector degrees;
};

namespace detail {

// k nearest neighbors of each sample by |y_i - y_j|, self excluded,
// distance ties resolved toward the smaller index.
inline std::vector<std::vector<int>> knn_sets(const Vector& y, int k) {
  const int n = static_cast<int>(y.size());
  std::vector<std::vector<int>> sets(n);
  std::vector<std::pair<double, int>> order;
  order.reserve(n - 1);
  for (int j = 0; j < n; ++j) {
    order.clear();
    for (int i = 0; i < n; ++i)
      if (i != j) order.emplace_back(std::abs(y(i) - y(j)), i);
    std::partial_sort(order.begin(), order.begin() + k, order.end());
    sets[j].reserve(k);
    for (int m = 0; m < k; ++m) sets[j].push_back(order[m].second);
  }
  return sets;
}

// Unordered pairs (i < j) with i in N_k(j) or j in N_k(i).
inline std::vector<std::pair<int, int>> knn_edges(
    const std::vector<std::vector<int>>& sets) {
  const int n = static_cast<int>(sets.size());
  std::vector<std::vector<char>> is_neighbor(n, std::vector<char>(n, 0));
  for (int j = 0; j < n; ++j)
    for (int i : sets[j]) is_neighbor[j][i] = 1;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (is_neighbor[i][j] || is_neighbor[j][i]) edges.emplace_back(i, j);
  return edges;
}

inline void check_graph_input(const Vector& y, int k) {
  require(y.size() >= 2, "graph: need at least two samples");
  require(k >= 1 && k < y.size(),
          "graph: neighbor count must satisfy 1 <= k <= n-1");
  require_finite(y, "graph baseline");
}

}  // namespace detail

// Median gap |y_i - y_j| over the kNN edge set; 1 when that median is zero
// (constant or near-constant baselines carry no usable scale).
inline double auto_sigma(const Vector& y, int k) {
  detail::check_graph_input(y, k);
  const auto edges = detail::knn_edges(detail::knn_sets(y, k));
  std::vector<double> gaps;
  gaps.reserve(edges.size());
  for (const auto& [i, j] : edges) gaps.push_back(std::abs(y(i) - y(j)));
  std::sort(gaps.begin(), gaps.end());
  const size_t m = gaps.size();
  const double median =
      m % 2 == 1 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
  if (median <= 0.0) {
    std::cerr << "warning: baseline gaps have zero median; "
                 "using bandwidth 1\n";
    return 1.0;
  }
  return median;
}

// w_ij = exp(-(y_i - y_j)^2 / (2 sigma^2)) when i is among j's k nearest
// neighbors or vice versa, 0 otherwise. Self-loops are excluded.
inline AffinityGraph build_knn_graph(const Vector& y,
                                     const GraphConfig& config) {
  detail::check_graph_input(y, config.k);
  require(config.sigma >= 0.0,
          "graph: bandwidth must be positive (or 0 to pick from data)");
  const int n = static_cast<int>(y.size());
  const double sigma =
      config.sigma > 0.0 ? config.sigma : auto_sigma(y, config.k);
  AffinityGraph graph;
  graph.sigma = sigma;
  graph.weights = Matrix::Zero(n, n);
  const auto edges = detail::knn_edges(detail::knn_sets(y, config.k));
  const double denom = 2.0 * sigma * sigma;
  for (const auto& [i, j] : edges) {
    const double d = y(i) - y(j);
    const double w = std::exp(-(d * d) / denom);
    graph.weights(i, j) = w;
    graph.weights(j, i) = w;
  }
  return graph;
}

// L = D - W with D_ii = sum_j w_ij. Diagonal entries of W cancel between
// D and W, so they are kept out of L entirely: L_ii is the off-diagonal
// row sum, which makes the cancellation exact rather than a rounding
// accident.
inline Laplacian laplacian(const Matrix& weights) {
  require(weights.rows() == weights.cols(), "laplacian: weights must be square");
  require_finite(weights, "laplacian weights");
  require(weights == weights.transpose().eval(),
          "laplacian: weights must be symmetric");
  require(weights.size() == 0 || weights.minCoeff() >= 0.0,
          "laplacian: weights must be nonnegative");
  const Eigen::Index n = weights.rows();
  Laplacian lap;
  lap.degrees = weights.rowwise().sum();
  lap.matrix = -weights;
  for (Eigen::Index i = 0; i < n; ++i) {
    double off_diagonal = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) off_diagonal += weights(i, j);
    lap.matrix(i, i) = off_diagonal;
  }
  return lap;
}

inline Laplacian laplacian(const AffinityGraph& graph) {
  return laplacian(graph.weights);
}

}  // namespace glrr
