#pragma once

#include <orpca/types.hpp>

#include <limits>
#include <vector>

namespace orpca {

/// ||est - truth||_F / ||truth||_F.
double err_rel(const Matrix& est, const Matrix& truth);

/// Fraction of entries whose nonzero pattern differs. est entries count as
/// nonzero when |x| > zero_eps, truth entries when x != 0.
double support_mismatch(const Matrix& est_s, const Matrix& true_s, double zero_eps = 0.0);

struct CpMatching {
  std::vector<Index> deviations;    // detected - true, in order of the true cps
  std::vector<Index> missed;        // true cps with no detection in the window
  std::vector<Index> false_alarms;  // detections left unmatched
};

/// Each true change point, in order, takes the nearest still-unmatched
/// detection within +-window (ties go to the earlier detection).
CpMatching cp_deviation(const std::vector<Index>& detected, const std::vector<Index>& truth,
                        Index window = std::numeric_limits<Index>::max());

struct EvalReport {
  double err_l = 0.0;
  double err_s = 0.0;
  double f_s = 0.0;
  std::vector<Index> cp_deviations;
  Index cp_missed = 0;
  Index cp_false_alarms = 0;
  double runtime_seconds = 0.0;
};

}  // namespace orpca
