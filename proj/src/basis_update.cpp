#include <orpca/basis_update.hpp>

#include <algorithm>
#include <cmath>

namespace orpca {

namespace {

void check_inputs(const Matrix& basis, const Matrix& accum_a, const Matrix& accum_b, double lambda1) {
  const Index r = basis.cols();
  require(accum_a.rows() == r && accum_a.cols() == r, "basis update: A must be r x r");
  require(accum_b.rows() == basis.rows() && accum_b.cols() == r, "basis update: B must be m x r");
  require(lambda1 > 0.0, "basis update: lambda1 must be positive");
  const double scale = std::max(1.0, accum_a.cwiseAbs().maxCoeff());
  require((accum_a - accum_a.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
          "basis update: A is not symmetric");
}

}  // namespace

void update_basis(Matrix& basis, const Matrix& accum_a, const Matrix& accum_b, double lambda1, int sweeps) {
  check_inputs(basis, accum_a, accum_b, lambda1);
  require(sweeps >= 1, "basis update: sweeps must be at least 1");

  const Index r = basis.cols();
  Vector col(basis.rows());
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (Index j = 0; j < r; ++j) {
      const double diag = accum_a(j, j) + lambda1;
      require(diag > 0.0, "basis update: non-positive diagonal of A + lambda1 I");
      // U * a~_j with a~_j the j-th column of A + lambda1 I
      col.noalias() = basis * accum_a.col(j);
      col += lambda1 * basis.col(j);
      col = (accum_b.col(j) - col) / diag + basis.col(j);
      basis.col(j) = col / std::max(col.norm(), 1.0);
    }
  }
}

double basis_surrogate(const Matrix& basis, const Matrix& accum_a, const Matrix& accum_b, double lambda1) {
  const Matrix gram = basis.transpose() * basis;
  return 0.5 * ((gram.array() * accum_a.array()).sum() + lambda1 * gram.trace()) -
         (basis.array() * accum_b.array()).sum();
}

}  // namespace orpca
