#include <orpca/projection.hpp>
#include <orpca/prox.hpp>

#include <algorithm>
#include <cmath>

namespace orpca {

void ProjectionConfig::validate() const {
  require(tol > 0.0, "projection: tol must be positive");
  require(max_iter >= 1, "projection: max_iter must be at least 1");
}

Projection project_sample(const Matrix& basis, const Vector& sample, double lambda1, double lambda2,
                          const ProjectionConfig& config) {
  config.validate();
  require(basis.rows() == sample.size(), "projection: sample dimension " + std::to_string(sample.size()) +
                                             " does not match basis rows " + std::to_string(basis.rows()));
  require(lambda1 > 0.0 && lambda2 > 0.0, "projection: lambda1 and lambda2 must be positive");
  require_finite(sample, "projection sample");
  require_finite(basis, "projection basis");

  const RidgeSolver ridge(basis, lambda1);
  Projection out;
  out.coeffs = Vector::Zero(basis.cols());
  out.sparse = Vector::Zero(sample.size());
  Vector prev_v(basis.cols());
  Vector residual(sample.size());

  for (int k = 0; k < config.max_iter; ++k) {
    prev_v = out.coeffs;
    out.coeffs = ridge.solve(sample - out.sparse);

    residual.noalias() = sample - basis * out.coeffs;
    double ds = 0.0;
    for (Index i = 0; i < residual.size(); ++i) {
      const double s_new = shrink(residual(i), lambda2);
      ds = std::max(ds, std::abs(s_new - out.sparse(i)));
      out.sparse(i) = s_new;
    }
    out.iterations = k + 1;

    const double dv = out.coeffs.size() ? (out.coeffs - prev_v).cwiseAbs().maxCoeff() : 0.0;
    if (std::max(dv, ds) < config.tol) break;
  }
  return out;
}

double projection_objective(const Matrix& basis, const Vector& sample, const Vector& coeffs,
                            const Vector& sparse, double lambda1, double lambda2) {
  const Vector r = sample - basis * coeffs - sparse;
  return 0.5 * r.squaredNorm() + 0.5 * lambda1 * coeffs.squaredNorm() + lambda2 * sparse.lpNorm<1>();
}

}  // namespace orpca
