#include <orpca/projection.hpp>
#include <orpca/prox.hpp>

#include "helpers.hpp"
#include "properties.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace orpca;
using orpca::test::gaussian;
using orpca::test::gaussian_vec;

TEST(Projection, ZeroBasisReducesToShrinkage) {
  const Matrix u = Matrix::Zero(2, 1);
  Vector y(2);
  y << 3.0, 0.1;
  const Projection p = project_sample(u, y, 0.1, 0.5);
  EXPECT_EQ(p.coeffs(0), 0.0);
  EXPECT_DOUBLE_EQ(p.sparse(0), 2.5);
  EXPECT_EQ(p.sparse(1), 0.0);
}

TEST(Projection, LargeSparsePenaltySuppressesOutliers) {
  std::mt19937_64 rng(21);
  const Matrix u = gaussian(rng, 10, 3);
  const Vector v_true = gaussian_vec(rng, 3);
  const Vector y = u * v_true;
  const Projection p = project_sample(u, y, 1e-6, y.cwiseAbs().maxCoeff());
  EXPECT_TRUE(p.sparse.isZero(0.0));
  EXPECT_LE((p.coeffs - v_true).norm(), 1e-3 * v_true.norm());
}

TEST(Projection, SmallInstanceMatchesOracle) {
  std::mt19937_64 rng(22);
  orpca::test::ProjectionInstance inst;
  inst.u = gaussian(rng, 6, 2);
  inst.y = gaussian_vec(rng, 6);
  inst.y(2) += 4.0;
  inst.lambda1 = 0.1;
  inst.lambda2 = 0.3;
  const Projection p = project_sample(inst.u, inst.y, inst.lambda1, inst.lambda2);
  const double f = projection_objective(inst.u, inst.y, p.coeffs, p.sparse, inst.lambda1, inst.lambda2);
  const double oracle = orpca::test::projection_oracle(inst, 200, rng);
  EXPECT_NEAR(f, oracle, 1e-6);
}

TEST(Projection, RandomInstancesMatchOracle) {
  const auto r = orpca::test::check_projection_oracle(60, 20, 23);
  EXPECT_TRUE(r.ok()) << r.detail;
}

TEST(Projection, ObjectiveNonIncreasingAcrossIterations) {
  std::mt19937_64 rng(24);
  for (int k = 0; k < 200; ++k) {
    const auto inst = orpca::test::random_projection_instance(rng);
    double prev = projection_objective(inst.u, inst.y, Vector::Zero(inst.u.cols()), Vector::Zero(inst.y.size()),
                                       inst.lambda1, inst.lambda2);
    for (int it = 1; it <= 15; ++it) {
      ProjectionConfig cfg;
      cfg.max_iter = it;
      cfg.tol = 1e-300;
      const Projection p = project_sample(inst.u, inst.y, inst.lambda1, inst.lambda2, cfg);
      const double f = projection_objective(inst.u, inst.y, p.coeffs, p.sparse, inst.lambda1, inst.lambda2);
      ASSERT_LE(f, prev + 1e-12 * std::max(1.0, std::abs(prev))) << "instance " << k << " iteration " << it;
      prev = f;
    }
  }
}

TEST(Projection, OneMoreAlternationIsNearlyStationary) {
  std::mt19937_64 rng(25);
  int capped = 0;
  for (int k = 0; k < 200; ++k) {
    const auto inst = orpca::test::random_projection_instance(rng);
    const ProjectionConfig cfg;
    const Projection p = project_sample(inst.u, inst.y, inst.lambda1, inst.lambda2, cfg);
    if (p.iterations == cfg.max_iter) {
      ++capped;  // stopped by the cap, not by the tolerance
      continue;
    }
    const double f = projection_objective(inst.u, inst.y, p.coeffs, p.sparse, inst.lambda1, inst.lambda2);
    const Vector v = ridge_regress(inst.u, inst.y - p.sparse, inst.lambda1);
    const Vector s = shrink_matrix(inst.y - inst.u * v, inst.lambda2);
    const double g = projection_objective(inst.u, inst.y, v, s, inst.lambda1, inst.lambda2);
    EXPECT_LT(f - g, cfg.tol) << "instance " << k;
  }
  EXPECT_LE(capped, 4);
}

TEST(Projection, LargeOutliersStayInSupport) {
  std::mt19937_64 rng(26);
  for (int k = 0; k < 100; ++k) {
    const Index m = 40;
    const Matrix q = Eigen::HouseholderQR<Matrix>(gaussian(rng, m, 2)).householderQ() * Matrix::Identity(m, 2);
    const double lambda2 = 0.5;
    Vector s_true = Vector::Zero(m);
    for (Index i : {Index(1), Index(5), Index(9), Index(30)})
      s_true(i) = (rng() % 2 ? 1.0 : -1.0) * orpca::test::uniform(rng, 20.0, 50.0);
    const Vector y = q * gaussian_vec(rng, 2) + s_true;
    const Projection p = project_sample(q, y, 1e-8, lambda2);
    for (Index i = 0; i < m; ++i)
      if (s_true(i) != 0.0) EXPECT_NE(p.sparse(i), 0.0) << "instance " << k << " entry " << i;
  }
}

TEST(Projection, RejectsBadInput) {
  const Matrix u = Matrix::Ones(3, 1);
  EXPECT_THROW(project_sample(u, Vector::Ones(4), 0.1, 0.1), Error);
  EXPECT_THROW(project_sample(u, Vector::Ones(3), 0.0, 0.1), Error);
  EXPECT_THROW(project_sample(u, Vector::Ones(3), 0.1, -1.0), Error);
  Vector bad = Vector::Ones(3);
  bad(0) = INFINITY;
  EXPECT_THROW(project_sample(u, bad, 0.1, 0.1), Error);
  ProjectionConfig cfg;
  cfg.max_iter = 0;
  EXPECT_THROW(project_sample(u, Vector::Ones(3), 0.1, 0.1, cfg), Error);
}
