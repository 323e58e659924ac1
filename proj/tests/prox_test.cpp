// Proximal operators and matrix norms, checked against independent oracles:
// an eigendecomposition route for everything SVD-based and a plain scalar
// loop for the column shrinkage.

#include "glrr/prox.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "glrr/rng.hpp"

namespace {

using glrr::Matrix;
using glrr::Vector;

Matrix random_matrix(glrr::Rng& rng, int rows, int cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  return m;
}

// SVD-shrinkage recomputation through the Gram matrix: M^T M = V L V^T,
// sigma = sqrt(L), svt(M, tau) = M V diag(f) V^T with f_i = (sigma_i - tau)/sigma_i
// for sigma_i > tau and 0 otherwise. Never divides by a small sigma because
// the factor is zero exactly where sigma is small.
Matrix svt_gram_oracle(const Matrix& m, double tau) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
  const Vector sigma = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Vector factor = Vector::Zero(sigma.size());
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma(i) > tau) factor(i) = (sigma(i) - tau) / sigma(i);
  return m * es.eigenvectors() * factor.asDiagonal() *
         es.eigenvectors().transpose();
}

// Scalar columnwise shrinkage, no Eigen reductions.
Matrix l21_scalar_oracle(const Matrix& q, double tau) {
  Matrix out = Matrix::Zero(q.rows(), q.cols());
  for (int j = 0; j < q.cols(); ++j) {
    double ss = 0.0;
    for (int i = 0; i < q.rows(); ++i) ss += q(i, j) * q(i, j);
    const double nrm = std::sqrt(ss);
    if (nrm > tau) {
      const double f = (nrm - tau) / nrm;
      for (int i = 0; i < q.rows(); ++i) out(i, j) = f * q(i, j);
    }
  }
  return out;
}

double nuclear_gram_oracle(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

double svt_objective(const Matrix& j, const Matrix& m, double tau) {
  return tau * glrr::nuclear_norm(j) + 0.5 * (j - m).squaredNorm();
}

TEST(Svt, TauZeroIsIdentity) {
  glrr::Rng rng(11);
  const Matrix m = random_matrix(rng, 7, 5);
  const Matrix out = glrr::svt(m, 0.0);
  EXPECT_LT((out - m).norm() / m.norm(), 1e-12);
}

TEST(Svt, DiagonalShrinksSingularValuesElementwise) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  const Matrix out = glrr::svt(m, 2.0);
  EXPECT_NEAR(out(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(out(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(out(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(out(1, 1), 0.0, 1e-12);
}

TEST(Svt, MatchesGramOracle) {
  glrr::Rng rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const int rows = 2 + static_cast<int>(rng.below(10));
    const int cols = 2 + static_cast<int>(rng.below(10));
    const Matrix m = random_matrix(rng, rows, cols);
    const double tau = rng.uniform() * 2.0;
    const Matrix out = glrr::svt(m, tau);
    const Matrix ref = svt_gram_oracle(m, tau);
    EXPECT_LT((out - ref).cwiseAbs().maxCoeff(), 1e-10)
        << "trial " << trial << " rows " << rows << " cols " << cols;
  }
}

TEST(Svt, BeatsRandomPerturbations) {
  glrr::Rng rng(13);
  const Matrix m = random_matrix(rng, 6, 4);
  const double tau = 0.7;
  const Matrix j = glrr::svt(m, tau);
  const double best = svt_objective(j, m, tau);
  for (int trial = 0; trial < 1000; ++trial) {
    Matrix delta = random_matrix(rng, 6, 4);
    delta *= 1e-3 / delta.norm();
    EXPECT_LE(best, svt_objective(j + delta, m, tau) + 1e-15);
  }
}

TEST(Svt, OutputSpectrumIsShrunkInputSpectrum) {
  glrr::Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_matrix(rng, 8, 6);
    const double tau = rng.uniform();
    const Matrix out = glrr::svt(m, tau);
    Eigen::BDCSVD<Matrix> svd_in(m);
    Eigen::BDCSVD<Matrix> svd_out(out);
    const Vector expected =
        (svd_in.singularValues().array() - tau).max(0.0).matrix();
    EXPECT_LT((svd_out.singularValues() - expected).cwiseAbs().maxCoeff(),
              1e-9);
  }
}

TEST(Svt, ContractsNuclearNormAndRank) {
  glrr::Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_matrix(rng, 6, 9);
    const double tau = rng.uniform() * 1.5;
    const Matrix out = glrr::svt(m, tau);
    EXPECT_LE(glrr::nuclear_norm(out), glrr::nuclear_norm(m) + 1e-12);
    EXPECT_LE(glrr::numerical_rank(out), glrr::numerical_rank(m));
  }
}

TEST(Svt, RejectsBadInput) {
  Matrix m = Matrix::Ones(2, 2);
  EXPECT_THROW(glrr::svt(m, -0.5), glrr::InvalidInput);
  m(1, 1) = std::nan("");
  EXPECT_THROW(glrr::svt(m, 1.0), glrr::InvalidInput);
}

TEST(L21Shrink, ColumnExamples) {
  Matrix q(2, 3);
  q.col(0) << 3.0, 4.0;   // norm 5, factor (5 - 2.5)/5
  q.col(1) << 0.6, 0.8;   // norm 1 <= tau, zeroed
  q.col(2) << 0.0, 0.0;
  const Matrix out = glrr::l21_shrink(q, 2.5);
  EXPECT_NEAR(out(0, 0), 1.5, 1e-12);
  EXPECT_NEAR(out(1, 0), 2.0, 1e-12);
  EXPECT_EQ(out(0, 1), 0.0);
  EXPECT_EQ(out(1, 1), 0.0);
  EXPECT_EQ(out(0, 2), 0.0);
}

TEST(L21Shrink, TauZeroIsExactIdentity) {
  glrr::Rng rng(16);
  const Matrix q = random_matrix(rng, 5, 7);
  const Matrix out = glrr::l21_shrink(q, 0.0);
  EXPECT_TRUE(out == q);
}

TEST(L21Shrink, MatchesScalarOracle) {
  glrr::Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = 1 + static_cast<int>(rng.below(8));
    const int cols = 1 + static_cast<int>(rng.below(8));
    const Matrix q = random_matrix(rng, rows, cols, 2.0);
    const double tau = rng.uniform() * 3.0;
    const Matrix out = glrr::l21_shrink(q, tau);
    const Matrix ref = l21_scalar_oracle(q, tau);
    EXPECT_LT((out - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(L21Shrink, OutputColumnNormsAreShrunkNorms) {
  glrr::Rng rng(18);
  const Matrix q = random_matrix(rng, 6, 10);
  const double tau = 1.2;
  const Matrix out = glrr::l21_shrink(q, tau);
  for (int j = 0; j < q.cols(); ++j) {
    const double expected = std::max(q.col(j).norm() - tau, 0.0);
    EXPECT_NEAR(out.col(j).norm(), expected, 1e-12);
  }
}

TEST(ProxMaps, NonExpansive) {
  glrr::Rng rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = random_matrix(rng, 5, 6);
    const Matrix b = random_matrix(rng, 5, 6);
    const double tau = rng.uniform() * 2.0;
    const double dist = (a - b).norm();
    EXPECT_LE((glrr::svt(a, tau) - glrr::svt(b, tau)).norm(), dist + 1e-10);
    EXPECT_LE((glrr::l21_shrink(a, tau) - glrr::l21_shrink(b, tau)).norm(),
              dist + 1e-10);
  }
}

TEST(Norms, L21Examples) {
  EXPECT_EQ(glrr::l21_norm(Matrix::Zero(3, 4)), 0.0);
  EXPECT_NEAR(glrr::l21_norm(Matrix::Identity(2, 2)), 2.0, 1e-15);
  Matrix m(2, 2);
  m << 3.0, 0.0, 4.0, 0.0;
  EXPECT_NEAR(glrr::l21_norm(m), 5.0, 1e-15);
}

TEST(Norms, InfNormExamples) {
  EXPECT_EQ(glrr::inf_norm(Matrix::Zero(2, 2)), 0.0);
  Matrix m(2, 2);
  m << -7.0, 2.0, 1.0, 3.0;
  EXPECT_EQ(glrr::inf_norm(m), 7.0);
}

TEST(Norms, InfNormBoundedByFrobenius) {
  glrr::Rng rng(20);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix m = random_matrix(rng, 1 + static_cast<int>(rng.below(6)),
                                   1 + static_cast<int>(rng.below(6)));
    EXPECT_LE(glrr::inf_norm(m), m.norm() + 1e-15);
  }
}

TEST(Norms, NuclearExamples) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  EXPECT_NEAR(glrr::nuclear_norm(m), 4.0, 1e-12);

  glrr::Rng rng(21);
  Vector u = Vector::Zero(5);
  Vector v = Vector::Zero(4);
  for (int i = 0; i < 5; ++i) u(i) = rng.normal();
  for (int i = 0; i < 4; ++i) v(i) = rng.normal();
  u.normalize();
  v.normalize();
  EXPECT_NEAR(glrr::nuclear_norm(u * v.transpose()), 1.0, 1e-12);
}

TEST(Norms, NuclearMatchesGramOracle) {
  glrr::Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_matrix(rng, 5, 5);
    EXPECT_NEAR(glrr::nuclear_norm(m), nuclear_gram_oracle(m), 1e-9);
  }
}

}  // namespace
