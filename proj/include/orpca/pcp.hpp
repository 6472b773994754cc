#pragma once

#include <orpca/types.hpp>

#include <optional>
#include <vector>

namespace orpca {

/// Settings for principal component pursuit solved by ALM. Unset lambda/mu
/// resolve to default_pcp_lambda / default_mu of the input matrix.
struct PcpConfig {
  std::optional<double> lambda;
  std::optional<double> mu;
  double tol = 1e-7;
  int max_iter = 500;

  void validate() const;
};

struct PcpResult {
  Matrix low_rank;
  Matrix sparse;
  int iterations = 0;
  bool converged = false;
  double lambda = 0.0;
  double mu = 0.0;
};

/// min ||L||_* + lambda ||S||_1  s.t.  L + S = M, with a fixed penalty mu.
/// Returns the last iterate with converged=false when max_iter is hit.
PcpResult pcp_alm(const Matrix& m, const PcpConfig& config = {});

/// 1 / sqrt(max(rows, cols)).
double default_pcp_lambda(Index rows, Index cols);

/// rows * cols / (4 ||M||_1); 1 for the zero matrix.
double default_mu(const Matrix& m);

/// Number of singular values strictly above rel_tol * sigma_max.
Index estimate_rank(const Matrix& l, double rel_tol = 1e-6);
Index count_above_relative(const Vector& singular_values, double rel_tol);

/// One entry of the moving window: observation, coefficients, sparse part.
struct WindowEntry {
  Vector sample;
  Vector coeffs;
  Vector sparse;
};

struct BurninInit {
  Index rank = 0;
  Matrix basis;   // m x r, U0 = U_hat * Sigma^{1/2}
  Matrix accum_a; // r x r
  Matrix accum_b; // m x r
  std::vector<WindowEntry> window_seed;  // oldest first

  // batch decomposition of the burn-in block
  Matrix low_rank;
  Matrix sparse;
  Vector singular_values;
  int pcp_iterations = 0;
  bool pcp_converged = false;
};

/// Batch PCP on the burn-in block, rank read-off, and construction of the
/// initial basis and window accumulators from the trailing n_win columns.
BurninInit burnin_initialize(const Matrix& burnin, Index n_win, const PcpConfig& pcp = {},
                             double rank_tol = 1e-6);

}  // namespace orpca
