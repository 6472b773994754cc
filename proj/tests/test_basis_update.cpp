#include <orpca/basis_update.hpp>

#include "helpers.hpp"
#include "properties.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace orpca;
using orpca::test::gaussian;

TEST(BasisUpdate, FixedPointIsUnchanged) {
  std::mt19937_64 rng(31);
  Matrix u = gaussian(rng, 8, 3);
  for (Index j = 0; j < 3; ++j) u.col(j) *= 0.9 / u.col(j).norm();
  const Matrix g = gaussian(rng, 3, 5);
  const Matrix a = g * g.transpose();
  const double lambda1 = 0.1;
  const Matrix b = u * (a + lambda1 * Matrix::Identity(3, 3));
  Matrix out = u;
  update_basis(out, a, b, lambda1);
  EXPECT_LE((out - u).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BasisUpdate, SingleColumnClosedForm) {
  Matrix a(1, 1);
  a << 2.0;
  Matrix b(3, 1);
  b << 0.5, -0.3, 0.8;
  Matrix u(3, 1);
  u << 0.9, 0.1, -0.2;
  const double lambda1 = 0.5;
  update_basis(u, a, b, lambda1);
  EXPECT_LE((u - b / 2.5).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BasisUpdate, LongColumnIsNormalized) {
  Matrix a = Matrix::Zero(1, 1);
  Matrix b(2, 1);
  b << 3.0, 4.0;
  Matrix u = Matrix::Zero(2, 1);
  update_basis(u, a, b, 1.0);
  EXPECT_NEAR(u(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(u(1, 0), 0.8, 1e-15);
}

TEST(BasisUpdate, SurrogateNeverIncreases) {
  const auto r = orpca::test::check_basis_monotonicity(1000, 32);
  EXPECT_TRUE(r.ok()) << r.detail;
}

TEST(BasisUpdate, RepeatedSweepsReachConstrainedMinimizer) {
  const auto r = orpca::test::check_basis_fixed_point(50, 33);
  EXPECT_TRUE(r.ok()) << r.detail << " (worst " << r.worst << ")";
}

TEST(BasisUpdate, IdempotentAtConvergence) {
  std::mt19937_64 rng(34);
  for (int k = 0; k < 50; ++k) {
    auto inst = orpca::test::random_basis_instance(rng, 8, 3);
    Matrix u = inst.u;
    update_basis(u, inst.a, inst.b, inst.lambda1, 2000);
    const double g1 = basis_surrogate(u, inst.a, inst.b, inst.lambda1);
    update_basis(u, inst.a, inst.b, inst.lambda1);
    update_basis(u, inst.a, inst.b, inst.lambda1);
    const double g2 = basis_surrogate(u, inst.a, inst.b, inst.lambda1);
    EXPECT_LT(std::abs(g1 - g2), 1e-12 * std::max(1.0, std::abs(g1)));
  }
}

TEST(BasisUpdate, RejectsBadInput) {
  Matrix u = Matrix::Zero(3, 2);
  Matrix a = Matrix::Identity(2, 2);
  Matrix b = Matrix::Zero(3, 2);
  Matrix asym = a;
  asym(0, 1) = 1.0;
  EXPECT_THROW(update_basis(u, asym, b, 0.1), Error);
  EXPECT_THROW(update_basis(u, a, Matrix::Zero(4, 2), 0.1), Error);
  EXPECT_THROW(update_basis(u, Matrix::Identity(3, 3), b, 0.1), Error);
  EXPECT_THROW(update_basis(u, a, b, 0.0), Error);
}
