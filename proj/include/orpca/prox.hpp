#pragma once

#include <orpca/types.hpp>

#include <cmath>
#include <optional>

namespace orpca {

/// Soft thresholding sgn(x) * max(|x| - tau, 0). tau == 0 is the identity.
inline double shrink(double x, double tau) {
  if (tau == 0.0) return x;
  const double mag = std::abs(x) - tau;
  if (mag <= 0.0) return 0.0;
  return x > 0.0 ? mag : -mag;
}

/// Elementwise soft thresholding.
Matrix shrink_matrix(const Matrix& x, double tau);

/// In-place variant used by the hot loops; works on any dense expression.
template <typename Derived>
void shrink_inplace(Eigen::DenseBase<Derived>& x, double tau) {
  if (tau == 0.0) return;
  x = x.unaryExpr([tau](double v) { return shrink(v, tau); });
}

/// Singular value thresholding: U * shrink(Sigma, tau) * V^T.
Matrix svt(const Matrix& x, double tau);

/// Factorization of the ridge normal matrix (U^T U + lambda1 I). Built once
/// per basis and reused for every right-hand side.
class RidgeSolver {
 public:
  RidgeSolver(const Matrix& basis, double lambda1);
  RidgeSolver(Matrix&&, double) = delete;  // keeps a reference to the basis

  /// (U^T U + lambda1 I)^{-1} U^T y
  Vector solve(const Vector& y) const;

  Index rank() const { return basis_->cols(); }

 private:
  const Matrix* basis_;
  Eigen::LLT<Matrix> llt_;
  std::optional<Eigen::ColPivHouseholderQR<Matrix>> fallback_;
};

/// Ridge regression coefficients (U^T U + lambda1 I)^{-1} U^T y.
Vector ridge_regress(const Matrix& basis, const Vector& y, double lambda1);

/// Nuclear norm (sum of singular values).
double nuclear_norm(const Matrix& x);

}  // namespace orpca
