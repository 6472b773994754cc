#include <orpca/prox.hpp>

#include <Eigen/SVD>

namespace orpca {

Matrix shrink_matrix(const Matrix& x, double tau) {
  require(tau >= 0.0, "shrink_matrix: tau must be nonnegative");
  Matrix out = x;
  shrink_inplace(out, tau);
  return out;
}

Matrix svt(const Matrix& x, double tau) {
  require(tau >= 0.0, "svt: tau must be nonnegative");
  require_finite(x, "svt input");
  if (x.size() == 0) return x;

  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) fail(Errc::numerical, "svt: SVD failed");

  const Vector& sigma = svd.singularValues();
  // singular values are sorted, so the kept block is a prefix
  Index keep = 0;
  while (keep < sigma.size() && sigma(keep) > tau) ++keep;
  if (keep == 0) return Matrix::Zero(x.rows(), x.cols());

  const Vector shrunk = (sigma.head(keep).array() - tau).matrix();
  return svd.matrixU().leftCols(keep) * shrunk.asDiagonal() * svd.matrixV().leftCols(keep).transpose();
}

RidgeSolver::RidgeSolver(const Matrix& basis, double lambda1) : basis_(&basis) {
  require(lambda1 > 0.0, "ridge: lambda1 must be positive");
  Matrix gram = basis.transpose() * basis;
  gram.diagonal().array() += lambda1;
  llt_.compute(gram);
  if (llt_.info() != Eigen::Success) fallback_.emplace(gram);
}

Vector RidgeSolver::solve(const Vector& y) const {
  require(y.size() == basis_->rows(), "ridge: dimension mismatch between basis and target");
  const Vector rhs = basis_->transpose() * y;
  if (fallback_) return fallback_->solve(rhs);
  return llt_.solve(rhs);
}

Vector ridge_regress(const Matrix& basis, const Vector& y, double lambda1) {
  require(basis.rows() == y.size(), "ridge_regress: basis has " + std::to_string(basis.rows()) +
                                        " rows but target has dimension " + std::to_string(y.size()));
  require_finite(basis, "ridge_regress basis");
  require_finite(y, "ridge_regress target");
  return RidgeSolver(basis, lambda1).solve(y);
}

double nuclear_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(x);
  return svd.singularValues().sum();
}

}  // namespace orpca
