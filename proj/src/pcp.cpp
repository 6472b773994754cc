#include <orpca/pcp.hpp>
#include <orpca/prox.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace orpca {

void PcpConfig::validate() const {
  require(!lambda || *lambda > 0.0, "pcp: lambda must be positive");
  require(!mu || *mu > 0.0, "pcp: mu must be positive");
  require(tol > 0.0 && tol < 1.0, "pcp: tol must lie in (0, 1)");
  require(max_iter >= 1, "pcp: max_iter must be at least 1");
}

double default_pcp_lambda(Index rows, Index cols) {
  require(rows >= 1 && cols >= 1, "default_pcp_lambda: dimensions must be positive");
  return 1.0 / std::sqrt(static_cast<double>(std::max(rows, cols)));
}

double default_mu(const Matrix& m) {
  const double l1 = m.cwiseAbs().sum();
  if (l1 == 0.0) return 1.0;
  return static_cast<double>(m.rows()) * static_cast<double>(m.cols()) / (4.0 * l1);
}

PcpResult pcp_alm(const Matrix& m, const PcpConfig& config) {
  config.validate();
  require(m.size() > 0, "pcp: empty input");
  require_finite(m, "pcp input");

  PcpResult res;
  res.lambda = config.lambda.value_or(default_pcp_lambda(m.rows(), m.cols()));
  res.mu = config.mu.value_or(default_mu(m));
  const double inv_mu = 1.0 / res.mu;
  const double threshold = config.tol * m.norm();

  res.low_rank = Matrix::Zero(m.rows(), m.cols());
  res.sparse = Matrix::Zero(m.rows(), m.cols());
  Matrix dual = Matrix::Zero(m.rows(), m.cols());
  Matrix work(m.rows(), m.cols());

  // the origin is a fixed point
  if (m.norm() == 0.0) {
    res.converged = true;
    return res;
  }

  for (int k = 0; k < config.max_iter; ++k) {
    work = m - res.sparse + inv_mu * dual;
    res.low_rank = svt(work, inv_mu);

    work = m - res.low_rank + inv_mu * dual;
    shrink_inplace(work, res.lambda * inv_mu);
    res.sparse = work;

    work = m - res.low_rank - res.sparse;
    dual += res.mu * work;
    res.iterations = k + 1;

    if (work.norm() <= threshold) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Index count_above_relative(const Vector& singular_values, double rel_tol) {
  require(rel_tol > 0.0 && rel_tol < 1.0, "estimate_rank: rel_tol must lie in (0, 1)");
  if (singular_values.size() == 0) return 0;
  const double top = singular_values.maxCoeff();
  if (top <= 0.0) return 0;
  return static_cast<Index>((singular_values.array() > rel_tol * top).count());
}

Index estimate_rank(const Matrix& l, double rel_tol) {
  if (l.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(l);
  return count_above_relative(svd.singularValues(), rel_tol);
}

BurninInit burnin_initialize(const Matrix& burnin, Index n_win, const PcpConfig& pcp, double rank_tol) {
  require(n_win >= 1, "burn-in: n_win must be positive");
  require(n_win <= burnin.cols(), "burn-in: n_win (" + std::to_string(n_win) +
                                      ") exceeds the number of burn-in samples (" +
                                      std::to_string(burnin.cols()) + ")");

  PcpResult dec = pcp_alm(burnin, pcp);

  Eigen::BDCSVD<Matrix> svd(dec.low_rank, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) fail(Errc::numerical, "burn-in: SVD of the low-rank part failed");

  BurninInit init;
  init.singular_values = svd.singularValues();
  init.rank = count_above_relative(init.singular_values, rank_tol);
  if (init.rank == 0) fail(Errc::initialization, "burn-in: low-rank part is zero, cannot estimate a basis");

  const Index r = init.rank;
  const Vector root_sigma = init.singular_values.head(r).cwiseSqrt();
  init.basis = svd.matrixU().leftCols(r) * root_sigma.asDiagonal();

  // column i of coeffs is v_i = Sigma^{1/2} * (row i of V_hat)^T
  const Matrix coeffs = root_sigma.asDiagonal() * svd.matrixV().leftCols(r).transpose();

  const Index m = burnin.rows();
  init.accum_a = Matrix::Zero(r, r);
  init.accum_b = Matrix::Zero(m, r);
  init.window_seed.reserve(static_cast<std::size_t>(n_win));
  for (Index i = burnin.cols() - n_win; i < burnin.cols(); ++i) {
    WindowEntry e{burnin.col(i), coeffs.col(i), dec.sparse.col(i)};
    init.accum_a.noalias() += e.coeffs * e.coeffs.transpose();
    init.accum_b.noalias() += (e.sample - e.sparse) * e.coeffs.transpose();
    init.window_seed.push_back(std::move(e));
  }

  init.low_rank = std::move(dec.low_rank);
  init.sparse = std::move(dec.sparse);
  init.pcp_iterations = dec.iterations;
  init.pcp_converged = dec.converged;
  return init;
}

}  // namespace orpca
