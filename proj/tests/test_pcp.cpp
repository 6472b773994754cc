#include <orpca/pcp.hpp>
#include <orpca/prox.hpp>

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace orpca;
using orpca::test::gaussian;
using orpca::test::max_principal_angle;

namespace {

Matrix sparse_outliers(std::mt19937_64& rng, Index rows, Index cols, double rho, double mag) {
  std::uniform_real_distribution<double> u01(0.0, 1.0), val(-mag, mag);
  Matrix s = Matrix::Zero(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      if (u01(rng) < rho) s(i, j) = val(rng);
  return s;
}

}  // namespace

TEST(Pcp, ZeroMatrixIsFixedPoint) {
  const PcpResult r = pcp_alm(Matrix::Zero(7, 5));
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 1);
  EXPECT_TRUE(r.low_rank.isZero(0.0));
  EXPECT_TRUE(r.sparse.isZero(0.0));
}

TEST(Pcp, RankOneWithoutOutliersIsReproduced) {
  std::mt19937_64 rng(11);
  const Matrix m = gaussian(rng, 50, 1) * gaussian(rng, 1, 50);
  PcpConfig cfg;
  cfg.lambda = 1.0 / std::sqrt(50.0);
  const PcpResult r = pcp_alm(m, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.low_rank - m).norm() / m.norm(), 1e-5);
  EXPECT_LE(r.sparse.norm(), 1e-5 * m.norm());
}

TEST(Pcp, RecoversLowRankPlusSparse) {
  std::mt19937_64 rng(12);
  const Matrix l = gaussian(rng, 100, 5) * gaussian(rng, 5, 100);
  const Matrix s = sparse_outliers(rng, 100, 100, 0.05, 1000.0);
  const PcpResult r = pcp_alm(l + s);
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.low_rank - l).norm() / l.norm(), 1e-3);
  EXPECT_LE((r.sparse - s).norm() / s.norm(), 1e-3);
}

TEST(Pcp, ConvergedResidualWithinTolerance) {
  std::mt19937_64 rng(13);
  const Matrix m = gaussian(rng, 30, 3) * gaussian(rng, 3, 40) + sparse_outliers(rng, 30, 40, 0.05, 50.0);
  PcpConfig cfg;
  cfg.tol = 1e-6;
  const PcpResult r = pcp_alm(m, cfg);
  ASSERT_TRUE(r.converged);
  EXPECT_LE((m - r.low_rank - r.sparse).norm(), cfg.tol * m.norm());
}

TEST(Pcp, IterationCapReportsNonConvergence) {
  std::mt19937_64 rng(14);
  const Matrix m = gaussian(rng, 20, 20);
  PcpConfig cfg;
  cfg.max_iter = 2;
  const PcpResult r = pcp_alm(m, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
  EXPECT_EQ(r.low_rank.rows(), 20);
}

TEST(Pcp, Deterministic) {
  std::mt19937_64 rng(15);
  const Matrix m = gaussian(rng, 25, 2) * gaussian(rng, 2, 30) + sparse_outliers(rng, 25, 30, 0.05, 10.0);
  const PcpResult a = pcp_alm(m), b = pcp_alm(m);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE(a.low_rank == b.low_rank);
  EXPECT_TRUE(a.sparse == b.sparse);
}

TEST(Pcp, RejectsBadInput) {
  Matrix m = Matrix::Ones(3, 3);
  m(1, 1) = std::nan("");
  EXPECT_THROW(pcp_alm(m), Error);
  PcpConfig cfg;
  cfg.tol = 1.5;
  EXPECT_THROW(pcp_alm(Matrix::Ones(2, 2), cfg), Error);
  cfg = {};
  cfg.max_iter = 0;
  EXPECT_THROW(pcp_alm(Matrix::Ones(2, 2), cfg), Error);
}

TEST(PcpDefaults, Lambda) {
  EXPECT_DOUBLE_EQ(default_pcp_lambda(400, 200), 0.05);
  EXPECT_DOUBLE_EQ(default_pcp_lambda(200, 200), 1.0 / std::sqrt(200.0));
  EXPECT_NEAR(default_pcp_lambda(200, 200), 0.0707106781, 1e-9);
  EXPECT_DOUBLE_EQ(default_pcp_lambda(1, 1), 1.0);
}

TEST(PcpDefaults, Mu) {
  EXPECT_DOUBLE_EQ(default_mu(Matrix::Ones(2, 2)), 0.25);
  EXPECT_DOUBLE_EQ(default_mu(Matrix::Zero(2, 2)), 1.0);
  Matrix d(2, 2);
  d << 2, 0, 0, 2;
  EXPECT_DOUBLE_EQ(default_mu(d), 0.25);
}

TEST(EstimateRank, Examples) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 5, 3, 1e-12;
  EXPECT_EQ(estimate_rank(d, 1e-6), 2);
  EXPECT_EQ(estimate_rank(Matrix::Zero(4, 6), 1e-6), 0);
  std::mt19937_64 rng(16);
  EXPECT_EQ(estimate_rank(gaussian(rng, 60, 7) * gaussian(rng, 7, 80), 1e-6), 7);
}

TEST(EstimateRank, StrictThreshold) {
  Vector s(3);
  s << 1.0, 1e-6, 2e-6;
  EXPECT_EQ(count_above_relative(s, 1e-6), 2);
}

TEST(BurninInitialize, RankOneMatchesDirectSvd) {
  std::mt19937_64 rng(17);
  const Matrix mb = gaussian(rng, 20, 1) * gaussian(rng, 1, 30);
  const BurninInit init = burnin_initialize(mb, 30);
  ASSERT_EQ(init.rank, 1);
  ASSERT_EQ(init.window_seed.size(), 30u);

  Eigen::JacobiSVD<Matrix> svd(mb, Eigen::ComputeThinU);
  EXPECT_LE(max_principal_angle(init.basis, svd.matrixU().leftCols(1)), 1e-6);

  double a = 0.0;
  Vector b = Vector::Zero(20);
  for (const WindowEntry& e : init.window_seed) {
    a += e.coeffs(0) * e.coeffs(0);
    b += (e.sample - e.sparse) * e.coeffs(0);
  }
  EXPECT_NEAR(init.accum_a(0, 0), a, 1e-10 * a);
  EXPECT_LE((init.accum_b.col(0) - b).norm(), 1e-10 * b.norm());
  // no outliers: the recovered sparse part is negligible, so B0 ~ sum m_i v_i
  Vector b_raw = Vector::Zero(20);
  for (const WindowEntry& e : init.window_seed) b_raw += e.sample * e.coeffs(0);
  EXPECT_LE((init.accum_b.col(0) - b_raw).norm(), 1e-4 * b_raw.norm());
}

TEST(BurninInitialize, SyntheticRecoversSubspace) {
  std::mt19937_64 rng(18);
  const Matrix l = gaussian(rng, 100, 3) * gaussian(rng, 3, 60);
  const Matrix s = sparse_outliers(rng, 100, 60, 0.01, 1000.0);
  const BurninInit init = burnin_initialize(l + s, 60);
  ASSERT_EQ(init.rank, 3);
  const Matrix proj = init.basis * init.basis.completeOrthogonalDecomposition().pseudoInverse();
  EXPECT_LE((proj * l - l).norm() / l.norm(), 1e-2);
}

TEST(BurninInitialize, StructuralInvariants) {
  std::mt19937_64 rng(19);
  const Matrix l = gaussian(rng, 40, 4) * gaussian(rng, 4, 50);
  const Matrix mb = l + sparse_outliers(rng, 40, 50, 0.02, 100.0);
  const Index n_win = 20;
  const BurninInit init = burnin_initialize(mb, n_win);
  ASSERT_EQ(init.rank, 4);
  ASSERT_EQ(init.window_seed.size(), static_cast<std::size_t>(n_win));

  // U0^T U0 is diagonal with the singular values of L_b on the diagonal
  const Matrix gram = init.basis.transpose() * init.basis;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) {
      const double expect = i == j ? init.singular_values(i) : 0.0;
      EXPECT_NEAR(gram(i, j), expect, 1e-8 * init.singular_values(0));
    }

  // A0, B0 are sums over the trailing n_win burn-in columns, oldest first
  Matrix a = Matrix::Zero(4, 4), b = Matrix::Zero(40, 4);
  for (Index k = 0; k < n_win; ++k) {
    const WindowEntry& e = init.window_seed[static_cast<std::size_t>(k)];
    EXPECT_TRUE(e.sample == mb.col(mb.cols() - n_win + k));
    EXPECT_TRUE(e.sparse == init.sparse.col(mb.cols() - n_win + k));
    a += e.coeffs * e.coeffs.transpose();
    b += (e.sample - e.sparse) * e.coeffs.transpose();
  }
  EXPECT_LE((init.accum_a - a).norm(), 1e-10 * a.norm());
  EXPECT_LE((init.accum_b - b).norm(), 1e-10 * b.norm());
  EXPECT_TRUE(init.accum_a.isApprox(init.accum_a.transpose(), 1e-14));
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(init.accum_a).eigenvalues().minCoeff(), -1e-8 * a.norm());

  // U0 v_i reproduces the burn-in low-rank columns
  for (Index k = 0; k < n_win; ++k) {
    const WindowEntry& e = init.window_seed[static_cast<std::size_t>(k)];
    const Vector lk = init.low_rank.col(mb.cols() - n_win + k);
    EXPECT_LE((init.basis * e.coeffs - lk).norm(), 1e-8 * std::max(1.0, lk.norm()));
  }

  EXPECT_LE((init.low_rank + init.sparse - mb).norm(), 1e-7 * mb.norm());
}

TEST(BurninInitialize, Errors) {
  EXPECT_THROW(
      {
        try {
          burnin_initialize(Matrix::Zero(5, 10), 5);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::initialization);
          throw;
        }
      },
      Error);
  std::mt19937_64 rng(20);
  const Matrix mb = gaussian(rng, 5, 1) * gaussian(rng, 1, 10);
  EXPECT_THROW(
      {
        try {
          burnin_initialize(mb, 11);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::contract_violation);
          throw;
        }
      },
      Error);
}
