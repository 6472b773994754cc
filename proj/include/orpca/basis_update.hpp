#pragma once

#include <orpca/types.hpp>

namespace orpca {

/// Block-coordinate descent on
///   g(U) = 1/2 Tr[U^T (A + lambda1 I) U] - Tr(U^T B)
/// over columns with ||u_j|| <= 1, warm-started from `basis`, which is
/// updated in place. A is r x r symmetric, B is m x r.
void update_basis(Matrix& basis, const Matrix& accum_a, const Matrix& accum_b, double lambda1, int sweeps = 1);

/// Surrogate value g(U).
double basis_surrogate(const Matrix& basis, const Matrix& accum_a, const Matrix& accum_b, double lambda1);

}  // namespace orpca
