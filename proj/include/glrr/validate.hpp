#pragma once

// Condensed self-check battery behind the `validate` CLI subcommand: each
// check recomputes an expected quantity through an independent route
// (explicit SVD shrinkage, scalar column formulas, eigen decompositions,
// duality gaps, bit round-trips) and compares against the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "glrr/cross_validation.hpp"
#include "glrr/graph.hpp"
#include "glrr/io.hpp"
#include "glrr/metrics.hpp"
#include "glrr/pipeline.hpp"
#include "glrr/prox.hpp"
#include "glrr/regression.hpp"
#include "glrr/rng.hpp"
#include "glrr/solver.hpp"
#include "glrr/synthetic.hpp"

namespace glrr {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;  // worst deviation or failure description
};

namespace detail {

inline Matrix validation_matrix(Rng& rng, int rows, int cols,
                                double scale = 1.0) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  return m;
}

inline ValidationCheck check_singular_value_shrinkage() {
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(10));
    const int n = 2 + static_cast<int>(rng.below(10));
    const Matrix m = validation_matrix(rng, d, n);
    const double tau = 0.05 + rng.uniform();
    Eigen::JacobiSVD<Matrix> svd(m,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i)
      s(i) = std::max(0.0, s(i) - tau);
    const Matrix expected =
        svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    worst = std::max(worst, inf_norm(Matrix(svt(m, tau) - expected)));
  }
  return {"singular-value shrinkage matches an independent SVD route",
          worst < 1e-9, "max deviation " + format_double(worst)};
}

inline ValidationCheck check_column_shrinkage() {
  Rng rng(102);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(10));
    const int n = 2 + static_cast<int>(rng.below(10));
    const Matrix m = validation_matrix(rng, d, n);
    const double tau = 0.05 + rng.uniform();
    Matrix expected = Matrix::Zero(d, n);
    for (int j = 0; j < n; ++j) {
      const double norm = m.col(j).norm();
      if (norm > tau) expected.col(j) = ((norm - tau) / norm) * m.col(j);
    }
    worst = std::max(worst, inf_norm(Matrix(l21_shrink(m, tau) - expected)));
  }
  return {"columnwise shrinkage matches the scalar formula", worst < 1e-12,
          "max deviation " + format_double(worst)};
}

inline ValidationCheck check_laplacian_laws() {
  Rng rng(103);
  double worst_row = 0.0, worst_eig = 0.0, worst_energy = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(20));
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = rng.normal();
    GraphConfig cfg;
    cfg.k = 1 + static_cast<int>(rng.below(4));
    const AffinityGraph graph = build_knn_graph(y, cfg);
    const Laplacian lap = laplacian(graph);
    worst_row = std::max(
        worst_row, (lap.matrix * Vector::Ones(n)).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(lap.matrix);
    worst_eig = std::min(worst_eig, eig.eigenvalues().minCoeff());
    const Matrix z = validation_matrix(rng, 3, n);
    const double quad = (z * lap.matrix * z.transpose()).trace();
    double pair_sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        pair_sum +=
            graph.weights(i, j) * (z.col(i) - z.col(j)).squaredNorm();
    worst_energy = std::max(
        worst_energy,
        std::abs(quad - 0.5 * pair_sum) / std::max(1.0, std::abs(quad)));
  }
  const bool ok =
      worst_row < 1e-12 && worst_eig >= -1e-10 && worst_energy < 1e-10;
  return {"graph Laplacian laws (zero row sums, PSD, pairwise energy)", ok,
          "row " + format_double(worst_row) + ", min eig " +
              format_double(worst_eig) + ", energy " +
              format_double(worst_energy)};
}

inline ValidationCheck check_z_update_stationarity() {
  Rng rng(104);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3 + static_cast<int>(rng.below(10));
    const int n = 4 + static_cast<int>(rng.below(16));
    const Matrix x = validation_matrix(rng, d, n);
    AdmmState s;
    s.Z = validation_matrix(rng, n, n);
    s.J = validation_matrix(rng, n, n);
    s.E = validation_matrix(rng, d, n);
    s.Y1 = validation_matrix(rng, n, n);
    s.Y2 = validation_matrix(rng, d, n);
    s.Zk = validation_matrix(rng, n, n);
    s.mu = 0.01 + 10.0 * rng.uniform();
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = rng.normal();
    GraphConfig gcfg;
    gcfg.k = 3;
    const Laplacian lap = laplacian(build_knn_graph(y, gcfg));
    const double beta = 2.0 * rng.uniform();
    const Matrix z = update_Z(s, x, lap, beta);
    const double c = x.squaredNorm();
    const Matrix g =
        s.Zk - x.transpose() * (x * s.Zk + s.E - x + s.Y2 / s.mu) / c;
    const Matrix residual = beta * z * lap.matrix + s.mu * c * (z - g) +
                            s.mu * (z - s.J + s.Y1 / s.mu);
    worst = std::max(worst, inf_norm(residual) / (1.0 + inf_norm(z)));
  }
  return {"representation update zeroes its surrogate gradient", worst < 1e-8,
          "max scaled residual " + format_double(worst)};
}

inline ValidationCheck check_clean_recovery() {
  Rng rng(105);
  const Matrix b = validation_matrix(rng, 10, 2);
  const Matrix coeffs = validation_matrix(rng, 2, 30);
  const Matrix x = b * coeffs;
  GlrrConfig cfg;
  cfg.lambda = 10.0;
  cfg.eps = 1e-7;
  cfg.max_iter = 400;
  Laplacian zero;
  zero.matrix = Matrix::Zero(30, 30);
  zero.degrees = Vector::Zero(30);
  const auto sol = solve(x, zero, cfg);
  const double rel_e = sol.E.norm() / x.norm();
  const bool ok = sol.converged && rel_e < 1e-4;
  return {"clean low-rank data solves with negligible noise term", ok,
          "converged " + std::string(sol.converged ? "yes" : "no") +
              ", relative noise " + format_double(rel_e)};
}

inline ValidationCheck check_svr_duality_gap() {
  Rng rng(106);
  double worst_gap = 0.0, worst_sum = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const int n = 14;
    const Matrix features = validation_matrix(rng, n, 2);
    Vector targets(n);
    for (int i = 0; i < n; ++i)
      targets(i) = std::sin(features(i, 0)) + 0.3 * features(i, 1);
    const FeatureSet data{features, targets};
    const double C = 5.0;
    const KernelSpec kernel{0.7};
    const SvrModel model = fit_svr(data, C, kernel, 0.05);
    const Matrix k = gaussian_kernel(features, features, kernel.gamma);
    const Vector& beta = model.dual_coeffs;
    const double quad = beta.dot(k * beta);
    const double dual = -0.5 * quad + targets.dot(beta) -
                         0.05 * beta.cwiseAbs().sum();
    const Vector pred = (k * beta).array() + model.bias;
    double hinge = 0.0;
    for (int i = 0; i < n; ++i)
      hinge += std::max(0.0, std::abs(targets(i) - pred(i)) - 0.05);
    const double primal = 0.5 * quad + C * hinge;
    worst_gap = std::max(worst_gap,
                         (primal - dual) / std::max(1.0, std::abs(primal)));
    worst_sum = std::max(worst_sum, std::abs(beta.sum()));
  }
  const bool ok = worst_gap < 1e-5 && worst_sum < 1e-8 * 14 * 5.0;
  return {"support vector regression closes its duality gap", ok,
          "relative gap " + format_double(worst_gap) + ", coefficient sum " +
              format_double(worst_sum)};
}

inline ValidationCheck check_metric_oracles() {
  Rng rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 3 + static_cast<int>(rng.below(30));
    Vector a(m), b(m);
    for (int i = 0; i < m; ++i) {
      a(i) = rng.normal();
      b(i) = rng.normal();
    }
    double ss = 0.0;
    for (int i = 0; i < m; ++i) ss += (a(i) - b(i)) * (a(i) - b(i));
    worst = std::max(worst, std::abs(rmse(a, b) - std::sqrt(ss / m)));
    const double base = pearson_r(a, b);
    const Vector scaled = (2.5 * a.array() + 0.75).matrix();
    worst = std::max(worst, std::abs(pearson_r(scaled, b) - base) / 100.0);
  }
  return {"error and correlation metrics match direct recomputation",
          worst < 1e-12, "max deviation " + format_double(worst)};
}

inline ValidationCheck check_split_determinism() {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = random_split(23, 0.4, seed);
    const auto b = random_split(23, 0.4, seed);
    if (a.train != b.train || a.test != b.test)
      return {"random splits are seeded and form exact partitions", false,
              "seed " + std::to_string(seed) + " not reproducible"};
    std::vector<int> all = a.train;
    all.insert(all.end(), a.test.begin(), a.test.end());
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 23; ++i)
      if (all[static_cast<size_t>(i)] != i)
        return {"random splits are seeded and form exact partitions", false,
                "seed " + std::to_string(seed) + " is not a partition"};
  }
  return {"random splits are seeded and form exact partitions", true,
          "20 seeds"};
}

inline ValidationCheck check_numeric_round_trip() {
  Rng rng(108);
  for (int trial = 0; trial < 200; ++trial) {
    const double value =
        std::ldexp(rng.normal(), static_cast<int>(rng.below(120)) - 60);
    const double back = parse_double(format_double(value), "round-trip");
    if (back != value)
      return {"decimal text round-trips every double bit-for-bit", false,
              "failed on " + format_double(value)};
  }
  return {"decimal text round-trips every double bit-for-bit", true,
          "200 values"};
}

inline ValidationCheck check_generator_determinism() {
  SyntheticSpec spec;
  spec.n = 40;
  spec.d = 8;
  spec.r = 3;
  spec.corrupt_fraction = 0.1;
  spec.seed = 9;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  const bool same =
      (a.dataset.spectra - b.dataset.spectra).cwiseAbs().maxCoeff() == 0.0 &&
      (a.dataset.aeronet - b.dataset.aeronet).cwiseAbs().maxCoeff() == 0.0 &&
      a.corrupted_columns == b.corrupted_columns;
  if (!same)
    return {"synthetic generator is bit-reproducible and plants as asked",
            false, "same seed produced different data"};
  spec.corrupt_fraction = 0.0;
  const auto clean = generate_synthetic(spec);
  Eigen::JacobiSVD<Matrix> svd(clean.dataset.spectra);
  const Vector s = svd.singularValues();
  const bool rank_ok = s(3) < 1e-10 * s(0);
  return {"synthetic generator is bit-reproducible and plants as asked",
          rank_ok && static_cast<int>(a.corrupted_columns.size()) == 4,
          "planted " + std::to_string(a.corrupted_columns.size()) +
              ", trailing singular value " + format_double(s(3))};
}

}  // namespace detail

inline std::vector<ValidationCheck> run_validation() {
  return {detail::check_singular_value_shrinkage(),
          detail::check_column_shrinkage(),
          detail::check_laplacian_laws(),
          detail::check_z_update_stationarity(),
          detail::check_clean_recovery(),
          detail::check_svr_duality_gap(),
          detail::check_metric_oracles(),
          detail::check_split_determinism(),
          detail::check_numeric_round_trip(),
          detail::check_generator_determinism()};
}

}  // namespace glrr
