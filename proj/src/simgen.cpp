#include <orpca/simgen.hpp>

#include <algorithm>
#include <cmath>

namespace orpca {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

namespace {

Matrix normal_matrix(Rng& rng, Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = rng.normal();
  return out;
}

/// Each entry nonzero independently with probability rho.
Matrix sparse_matrix(Rng& rng, Index rows, Index cols, double rho, double magnitude) {
  Matrix out = Matrix::Zero(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      if (rng.uniform() < rho) out(i, j) = rng.uniform(-magnitude, magnitude);
  return out;
}

/// Burn-in block L_b + S_b generated from `basis`.
void fill_burnin(GroundTruth& gt, Rng& rng, const Matrix& basis, const SimSpec& spec) {
  const Matrix coeffs = normal_matrix(rng, basis.cols(), spec.n_burnin);
  gt.burnin_low_rank = basis * coeffs;
  gt.burnin_sparse = sparse_matrix(rng, spec.m, spec.n_burnin, spec.rho, spec.sparse_magnitude);
  gt.burnin = gt.burnin_low_rank + gt.burnin_sparse;
}

struct Piece {
  Index start;
  Index length;
  Index rank;
};

/// Shared engine for the drifting variants. Piece p has a fresh basis whose
/// leading drift_rank columns move linearly between increments every
/// piece_length samples.
GroundTruth gen_pieces(const SimSpec& spec, const std::vector<Piece>& pieces, Index drift_rank, Index piece_length) {
  Rng rng(spec.seed);
  GroundTruth gt;
  gt.drift_rank = drift_rank;
  gt.piece_length = piece_length;

  for (std::size_t p = 0; p < pieces.size(); ++p) {
    gt.piece_starts.push_back(pieces[p].start);
    gt.piece_bases.push_back(normal_matrix(rng, spec.m, pieces[p].rank));
    if (p == 0) fill_burnin(gt, rng, gt.piece_bases[0], spec);

    const Index r0 = std::min(drift_rank, pieces[p].rank);
    std::vector<Matrix> incs;
    if (r0 > 0) {
      const Index k = (pieces[p].length + piece_length - 1) / piece_length;  // ceil
      for (Index i = 0; i <= k; ++i) incs.push_back(normal_matrix(rng, spec.m, r0));
    }
    gt.piece_increments.push_back(std::move(incs));
  }
  for (std::size_t p = 1; p < pieces.size(); ++p) gt.change_points.push_back(pieces[p].start);

  gt.L.resize(spec.m, spec.T);
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const Piece& piece = pieces[p];
    const Matrix coeffs = normal_matrix(rng, piece.rank, piece.length);
    for (Index tau = 0; tau < piece.length; ++tau) {
      const Matrix basis = gt.basis_at(piece.start + tau);
      gt.L.col(piece.start + tau) = basis * coeffs.col(tau);
    }
  }
  gt.S = sparse_matrix(rng, spec.m, spec.T, spec.rho, spec.sparse_magnitude);
  gt.M = gt.L + gt.S;
  return gt;
}

}  // namespace

Matrix GroundTruth::basis_at(Index t) const {
  require(!piece_starts.empty(), "ground truth: no subspace trace");
  std::size_t p = 0;
  while (p + 1 < piece_starts.size() && piece_starts[p + 1] <= t) ++p;
  Matrix basis = piece_bases[p];
  const auto& incs = piece_increments[p];
  if (incs.empty()) return basis;

  const Index tau = t - piece_starts[p];
  const Index i = tau / piece_length;
  const Index j = tau % piece_length;
  const Index r0 = incs.front().cols();
  auto block = basis.leftCols(r0);
  for (Index k = 0; k < i; ++k) block += incs[static_cast<std::size_t>(k)];
  block += (static_cast<double>(j) / static_cast<double>(piece_length)) * incs[static_cast<std::size_t>(i)];
  return basis;
}

void SimSpec::validate() const {
  require(m >= 1 && T >= 0 && n_burnin >= 1, "simulate: m, n_burnin must be positive and T nonnegative");
  require(rho >= 0.0 && rho < 1.0, "simulate: rho must lie in [0, 1)");
  require(sparse_magnitude > 0.0, "simulate: sparse magnitude must be positive");
  if (const auto* s = std::get_if<StableVariant>(&variant)) {
    require(s->rank >= 1, "simulate: rank must be positive");
  } else if (const auto* d = std::get_if<DriftVariant>(&variant)) {
    require(d->rank >= 1, "simulate: rank must be positive");
    require(d->drift_rank >= 0 && d->drift_rank <= d->rank, "simulate: r0 must lie in [0, r]");
    require(d->piece_length >= 1, "simulate: T_p must be positive");
  } else {
    const auto& c = std::get<ChangePointVariant>(variant);
    require(!c.ranks.empty() && c.ranks.size() == c.change_points.size() + 1,
            "simulate: need exactly one more rank than change points");
    for (Index r : c.ranks) require(r >= 1, "simulate: ranks must be positive");
    Index prev = 0;
    for (Index cp : c.change_points) {
      require(cp > prev && cp < T, "simulate: change points must be strictly increasing within (0, T)");
      prev = cp;
    }
    require(c.drift_rank >= 0, "simulate: r0 must be nonnegative");
    require(c.piece_length >= 1, "simulate: T_p must be positive");
  }
}

GroundTruth gen_stable(const SimSpec& spec) {
  spec.validate();
  const auto* v = std::get_if<StableVariant>(&spec.variant);
  require(v != nullptr, "gen_stable: variant is not STABLE");
  return gen_pieces(spec, {Piece{0, spec.T, v->rank}}, 0, 1);
}

GroundTruth gen_drift(const SimSpec& spec) {
  spec.validate();
  const auto* v = std::get_if<DriftVariant>(&spec.variant);
  require(v != nullptr, "gen_drift: variant is not DRIFT");
  return gen_pieces(spec, {Piece{0, spec.T, v->rank}}, v->drift_rank, v->piece_length);
}

GroundTruth gen_changepoints(const SimSpec& spec) {
  spec.validate();
  const auto* v = std::get_if<ChangePointVariant>(&spec.variant);
  require(v != nullptr, "gen_changepoints: variant is not CHANGEPOINTS");
  std::vector<Piece> pieces;
  Index start = 0;
  for (std::size_t p = 0; p < v->ranks.size(); ++p) {
    const Index end = p < v->change_points.size() ? v->change_points[p] : spec.T;
    require(end > start, "gen_changepoints: empty piece");
    pieces.push_back({start, end - start, v->ranks[p]});
    start = end;
  }
  return gen_pieces(spec, pieces, v->drift_rank, v->piece_length);
}

GroundTruth generate(const SimSpec& spec) {
  if (std::holds_alternative<StableVariant>(spec.variant)) return gen_stable(spec);
  if (std::holds_alternative<DriftVariant>(spec.variant)) return gen_drift(spec);
  return gen_changepoints(spec);
}

}  // namespace orpca
