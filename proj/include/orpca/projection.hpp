#pragma once

#include <orpca/types.hpp>

namespace orpca {

struct ProjectionConfig {
  double tol = 1e-7;  // on the max-norm change of v and s between sweeps
  int max_iter = 1000;

  void validate() const;
};

struct Projection {
  Vector coeffs;  // v
  Vector sparse;  // s
  int iterations = 0;
};

/// Solves min_{v,s} 1/2 ||y - U v - s||^2 + lambda1/2 ||v||^2 + lambda2 ||s||_1
/// by alternating exact minimization, starting from s = 0.
Projection project_sample(const Matrix& basis, const Vector& sample, double lambda1, double lambda2,
                          const ProjectionConfig& config = {});

/// The objective minimized by project_sample.
double projection_objective(const Matrix& basis, const Vector& sample, const Vector& coeffs,
                            const Vector& sparse, double lambda1, double lambda2);

}  // namespace orpca
