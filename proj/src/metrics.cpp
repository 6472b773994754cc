#include <orpca/metrics.hpp>

#include <cstdlib>

namespace orpca {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
              " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

}  // namespace

double err_rel(const Matrix& est, const Matrix& truth) {
  require_same_shape(est, truth, "err_rel");
  const double denom = truth.norm();
  require(denom > 0.0, "err_rel: truth has zero Frobenius norm");
  return (est - truth).norm() / denom;
}

double support_mismatch(const Matrix& est_s, const Matrix& true_s, double zero_eps) {
  require_same_shape(est_s, true_s, "support_mismatch");
  require(zero_eps >= 0.0, "support_mismatch: zero_eps must be nonnegative");
  if (est_s.size() == 0) return 0.0;
  Index differ = 0;
  for (Index j = 0; j < est_s.cols(); ++j)
    for (Index i = 0; i < est_s.rows(); ++i)
      if ((std::abs(est_s(i, j)) > zero_eps) != (true_s(i, j) != 0.0)) ++differ;
  return static_cast<double>(differ) / static_cast<double>(est_s.size());
}

CpMatching cp_deviation(const std::vector<Index>& detected, const std::vector<Index>& truth, Index window) {
  CpMatching out;
  std::vector<bool> used(detected.size(), false);
  for (Index t : truth) {
    std::size_t best = detected.size();
    Index best_gap = 0;
    for (std::size_t k = 0; k < detected.size(); ++k) {
      if (used[k]) continue;
      const Index gap = std::abs(detected[k] - t);
      if (gap > window) continue;
      if (best == detected.size() || gap < best_gap || (gap == best_gap && detected[k] < detected[best])) {
        best = k;
        best_gap = gap;
      }
    }
    if (best == detected.size()) {
      out.missed.push_back(t);
    } else {
      used[best] = true;
      out.deviations.push_back(detected[best] - t);
    }
  }
  for (std::size_t k = 0; k < detected.size(); ++k)
    if (!used[k]) out.false_alarms.push_back(detected[k]);
  return out;
}

}  // namespace orpca
