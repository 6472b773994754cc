#pragma once

#include <orpca/types.hpp>

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace orpca {

/// Seedable, platform-independent generator for the synthetic studies.
///
/// Bits come from std::mt19937_64 (fully specified by the standard).
/// uniform() is (x >> 11) * 2^-53. normal() is the Marsaglia polar method
/// on 2*uniform()-1 pairs, returning the cached second variate on the next
/// call. Ports reproduce streams by reimplementing exactly this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct StableVariant {
  Index rank = 5;
};

struct DriftVariant {
  Index rank = 10;
  Index drift_rank = 5;     // r0, leading columns that drift
  Index piece_length = 250; // T_p
};

struct ChangePointVariant {
  std::vector<Index> ranks;          // one per piece
  std::vector<Index> change_points;  // first index of each new piece
  Index drift_rank = 5;
  Index piece_length = 250;
};

struct SimSpec {
  Index m = 100;
  Index T = 1000;
  Index n_burnin = 100;
  double rho = 0.01;
  std::uint64_t seed = 0;
  double sparse_magnitude = 1000.0;  // nonzeros uniform on [-mag, mag]
  std::variant<StableVariant, DriftVariant, ChangePointVariant> variant;

  void validate() const;
};

struct GroundTruth {
  Matrix M, L, S;        // m x T, M = L + S
  Matrix burnin;         // m x n_burnin
  Matrix burnin_low_rank;
  Matrix burnin_sparse;
  std::vector<Index> change_points;

  // subspace trace: piece p starts at piece_starts[p] with basis
  // piece_bases[p] and drift increments piece_increments[p][k]
  std::vector<Index> piece_starts;
  std::vector<Matrix> piece_bases;
  std::vector<std::vector<Matrix>> piece_increments;
  Index drift_rank = 0;
  Index piece_length = 0;

  /// Basis U_t generating column t.
  Matrix basis_at(Index t) const;
};

GroundTruth gen_stable(const SimSpec& spec);
GroundTruth gen_drift(const SimSpec& spec);
GroundTruth gen_changepoints(const SimSpec& spec);
/// Dispatches on the variant.
GroundTruth generate(const SimSpec& spec);

}  // namespace orpca
