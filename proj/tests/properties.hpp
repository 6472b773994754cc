#pragma once

// Randomized property checks with independent oracles. Shared by the unit
// tests (smaller instance counts) and the acceptance binary.

#include <orpca/basis_update.hpp>
#include <orpca/pcp.hpp>
#include <orpca/projection.hpp>
#include <orpca/prox.hpp>
#include <orpca/simgen.hpp>
#include <orpca/tracker.hpp>

#include "helpers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace orpca::test {

struct PropertyResult {
  int instances = 0;
  int failures = 0;
  double worst = 0.0;  // largest violation or error seen
  std::string detail;

  bool ok() const { return failures == 0; }
  void fail(const std::string& what) {
    if (failures++ == 0) detail = what;
  }
};

// ---------------------------------------------------------------- shrink

inline PropertyResult check_shrink_properties(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (int k = 0; k < n; ++k, ++r.instances) {
    const double scale = std::pow(10.0, uniform(rng, -3.0, 3.0));
    const double x = uniform(rng, -1.0, 1.0) * scale;
    const double y = uniform(rng, -1.0, 1.0) * scale;
    const double tau = k % 10 == 0 ? 0.0 : uniform(rng, 0.0, 1.0) * scale;
    if (shrink(-x, tau) != -shrink(x, tau)) r.fail("oddness violated at x=" + std::to_string(x));
    const double lhs = std::abs(shrink(x, tau) - shrink(y, tau));
    const double rhs = std::abs(x - y);
    // rounding of x - tau may cost an ulp or two
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(x) + std::abs(y) + tau);
    r.worst = std::max(r.worst, lhs - rhs);
    if (lhs > rhs + slack) r.fail("non-expansiveness violated at x=" + std::to_string(x) + ", y=" + std::to_string(y));
  }
  return r;
}

// ---------------------------------------------------------------- svt

inline Index numeric_rank(const Matrix& x) {
  if (x.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(x);
  const Vector s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<Index>((s.array() > 1e-10 * s(0)).count());
}

inline PropertyResult check_svt_properties(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (int k = 0; k < n; ++k, ++r.instances) {
    const Index rows = 1 + static_cast<Index>(rng() % 8);
    const Index cols = 1 + static_cast<Index>(rng() % 8);
    const Index rank = 1 + static_cast<Index>(rng() % std::min(rows, cols));
    const Matrix x = gaussian(rng, rows, rank) * gaussian(rng, rank, cols);
    const double tau = uniform(rng, 0.0, 2.0) * (x.norm() / std::sqrt(static_cast<double>(rank)));
    const Matrix y = svt(x, tau);
    const double before = nuclear_norm(x);
    const double after = nuclear_norm(y);
    r.worst = std::max(r.worst, after - before);
    if (after > before * (1.0 + 1e-12)) r.fail("nuclear norm grew: " + std::to_string(before) + " -> " + std::to_string(after));
    if (numeric_rank(y) > numeric_rank(x)) r.fail("rank grew");
  }
  return r;
}

// ---------------------------------------------------------------- ridge

inline PropertyResult check_ridge_optimality(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (int k = 0; k < n; ++k, ++r.instances) {
    const Index m = 2 + static_cast<Index>(rng() % 20);
    const Index rank = 1 + static_cast<Index>(rng() % std::min<Index>(m, 6));
    const Matrix u = gaussian(rng, m, rank);
    const Vector y = gaussian_vec(rng, m);
    const double lambda1 = std::pow(10.0, uniform(rng, -3.0, 1.0));
    const Vector v = ridge_regress(u, y, lambda1);
    auto objective = [&](const Vector& w) {
      return 0.5 * (y - u * w).squaredNorm() + 0.5 * lambda1 * w.squaredNorm();
    };
    const double best = objective(v);
    for (int d = 0; d < 100; ++d) {
      Vector dir = gaussian_vec(rng, rank);
      dir *= 1e-3 / dir.norm();
      const double f = objective(v + dir);
      r.worst = std::max(r.worst, best - f);
      if (f < best) {
        r.fail("perturbation decreased the ridge objective");
        break;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------- projection

struct ProjectionInstance {
  Matrix u;
  Vector y;
  double lambda1, lambda2;
};

inline ProjectionInstance random_projection_instance(std::mt19937_64& rng) {
  ProjectionInstance p;
  const Index m = 2 + static_cast<Index>(rng() % 5);  // 2..6
  const Index r = 1 + static_cast<Index>(rng() % 2);  // 1..2
  p.u = gaussian(rng, m, r);
  p.y = p.u * gaussian_vec(rng, r) + 0.3 * gaussian_vec(rng, m);
  // a few gross outliers
  for (Index i = 0; i < m; ++i)
    if (uniform(rng, 0.0, 1.0) < 0.25) p.y(i) += uniform(rng, -5.0, 5.0);
  p.lambda1 = std::pow(10.0, uniform(rng, -2.0, 0.0));
  p.lambda2 = std::pow(10.0, uniform(rng, -1.3, 0.3));
  return p;
}

/// Brute force: restarts from random (v, s) with long alternating runs, then
/// cyclic coordinate descent on the joint objective; best objective wins.
inline double projection_oracle(const ProjectionInstance& p, int restarts, std::mt19937_64& rng) {
  const Index m = p.u.rows(), r = p.u.cols();
  double best = std::numeric_limits<double>::infinity();
  const Matrix gram = p.u.transpose() * p.u + p.lambda1 * Matrix::Identity(r, r);
  const Matrix gram_inv = gram.inverse();
  for (int k = 0; k < restarts; ++k) {
    Vector v = 5.0 * gaussian_vec(rng, r);
    Vector s = 5.0 * gaussian_vec(rng, m);
    for (int it = 0; it < 20000; ++it) {
      const Vector v_new = gram_inv * (p.u.transpose() * (p.y - s));
      const Vector s_new = (p.y - p.u * v_new).unaryExpr([&](double x) { return shrink(x, p.lambda2); });
      const double change = std::max((v_new - v).cwiseAbs().maxCoeff(), (s_new - s).cwiseAbs().maxCoeff());
      v = v_new;
      s = s_new;
      if (change < 1e-15) break;
    }
    // coordinate descent polish
    for (int sweep = 0; sweep < 2000; ++sweep) {
      double change = 0.0;
      for (Index j = 0; j < r; ++j) {
        const Vector resid = p.y - s - p.u * v + p.u.col(j) * v(j);
        const double vj = p.u.col(j).dot(resid) / (p.u.col(j).squaredNorm() + p.lambda1);
        change = std::max(change, std::abs(vj - v(j)));
        v(j) = vj;
      }
      for (Index i = 0; i < m; ++i) {
        const double si = shrink(p.y(i) - p.u.row(i).dot(v), p.lambda2);
        change = std::max(change, std::abs(si - s(i)));
        s(i) = si;
      }
      if (change < 1e-15) break;
    }
    best = std::min(best, projection_objective(p.u, p.y, v, s, p.lambda1, p.lambda2));
  }
  return best;
}

inline PropertyResult check_projection_oracle(int n, int restarts, std::uint64_t seed,
                                              const ProjectionConfig& config = {}) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (int k = 0; k < n; ++k, ++r.instances) {
    const ProjectionInstance p = random_projection_instance(rng);
    const Projection got = project_sample(p.u, p.y, p.lambda1, p.lambda2, config);
    const double f = projection_objective(p.u, p.y, got.coeffs, got.sparse, p.lambda1, p.lambda2);
    const double oracle = projection_oracle(p, restarts, rng);
    const double gap = f - oracle;
    r.worst = std::max(r.worst, std::abs(gap));
    if (std::abs(gap) > 1e-6) {
      std::ostringstream os;
      os << "instance " << k << ": objective " << f << " vs oracle " << oracle << " (iterations " << got.iterations
         << ")";
      r.fail(os.str());
    }
  }
  return r;
}

// ---------------------------------------------------------------- basis update

struct BasisInstance {
  Matrix u, a, b;
  double lambda1;
};

inline BasisInstance random_basis_instance(std::mt19937_64& rng, Index m, Index r) {
  BasisInstance p;
  const Matrix g = gaussian(rng, r, r + 2);
  p.a = g * g.transpose();
  p.b = gaussian(rng, m, r) * uniform(rng, 0.2, 3.0);
  p.u = gaussian(rng, m, r);
  for (Index j = 0; j < r; ++j) p.u.col(j) /= std::max(p.u.col(j).norm(), 1.0);
  p.lambda1 = std::pow(10.0, uniform(rng, -2.0, 0.0));
  return p;
}

inline PropertyResult check_basis_monotonicity(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (int k = 0; k < n; ++k, ++r.instances) {
    const Index m = 1 + static_cast<Index>(rng() % 12);
    const Index rank = 1 + static_cast<Index>(rng() % 5);
    BasisInstance p = random_basis_instance(rng, m, rank);
    const double before = basis_surrogate(p.u, p.a, p.b, p.lambda1);
    Matrix u = p.u;
    update_basis(u, p.a, p.b, p.lambda1);
    const double after = basis_surrogate(u, p.a, p.b, p.lambda1);
    r.worst = std::max(r.worst, after - before);
    // equality up to rounding of the surrogate itself
    if (after > before + 1e-12 * std::max(1.0, std::abs(before)))
      r.fail("surrogate increased: " + std::to_string(before) + " -> " + std::to_string(after));
    for (Index j = 0; j < rank; ++j)
      if (u.col(j).norm() > 1.0 + 1e-12) r.fail("column norm above 1");
  }
  return r;
}

/// Projected gradient on g over the product of unit balls, step 1/L.
inline Matrix projected_gradient_oracle(const BasisInstance& p) {
  const Index r = p.a.rows();
  const Matrix at = p.a + p.lambda1 * Matrix::Identity(r, r);
  const double lip = Eigen::SelfAdjointEigenSolver<Matrix>(at).eigenvalues().maxCoeff();
  Matrix u = p.u;
  for (int it = 0; it < 2000000; ++it) {
    Matrix next = u - (u * at - p.b) / lip;
    for (Index j = 0; j < r; ++j) next.col(j) /= std::max(next.col(j).norm(), 1.0);
    const double change = (next - u).cwiseAbs().maxCoeff();
    u = next;
    if (change < 1e-14) break;
  }
  return u;
}

inline PropertyResult check_basis_fixed_point(int n, std::uint64_t seed, int sweeps = 50) {
  std::mt19937_64 rng(seed);
  PropertyResult r;
  for (int k = 0; k < n; ++k, ++r.instances) {
    BasisInstance p = random_basis_instance(rng, 8, 3);
    Matrix u = p.u;
    update_basis(u, p.a, p.b, p.lambda1, sweeps);
    const Matrix oracle = projected_gradient_oracle(p);
    const double err = (u - oracle).cwiseAbs().maxCoeff();
    r.worst = std::max(r.worst, err);
    if (err > 1e-6) r.fail("instance " + std::to_string(k) + ": max deviation from oracle " + std::to_string(err));
  }
  return r;
}

// ---------------------------------------------------------------- window identity

/// Runs OMW for `steps` samples of a stable stream and after every step
/// compares A, B with sums recomputed from the window buffer.
inline PropertyResult check_window_identity(int steps, Index n_win, std::uint64_t seed, double tol = 1e-8) {
  SimSpec spec;
  spec.m = 100;
  spec.T = steps;
  spec.n_burnin = n_win;
  spec.seed = seed;
  spec.variant = StableVariant{5};
  const GroundTruth gt = generate(spec);
  const BurninInit init = burnin_initialize(gt.burnin, n_win);
  OmwTracker tracker(init, 0.05, 5.0, n_win);
  PropertyResult r;
  for (Index t = 0; t < steps; ++t, ++r.instances) {
    tracker.step(gt.M.col(t));
    Matrix a = Matrix::Zero(init.rank, init.rank);
    Matrix b = Matrix::Zero(spec.m, init.rank);
    tracker.window().accumulate(a, b);
    const double err = std::max((a - tracker.model().accum_a).norm(), (b - tracker.model().accum_b).norm());
    r.worst = std::max(r.worst, err);
    if (err > tol) r.fail("step " + std::to_string(t) + ": deviation " + std::to_string(err));
  }
  return r;
}

}  // namespace orpca::test
