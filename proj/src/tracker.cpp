#include <orpca/basis_update.hpp>
#include <orpca/stream.hpp>
#include <orpca/tracker.hpp>

#include <cmath>
#include <string>

namespace orpca {

// ---------------------------------------------------------------- window

WindowBuffer::WindowBuffer(std::size_t capacity) : slots_(capacity) {
  require(capacity >= 1, "window buffer: capacity must be positive");
}

const WindowEntry& WindowBuffer::at(std::size_t i) const {
  require(i < size_, "window buffer: index out of range");
  return slots_[(head_ + i) % slots_.size()];
}

std::optional<WindowEntry> WindowBuffer::push(WindowEntry entry) {
  if (size_ < slots_.size()) {
    slots_[(head_ + size_) % slots_.size()] = std::move(entry);
    ++size_;
    return std::nullopt;
  }
  std::optional<WindowEntry> evicted = std::move(slots_[head_]);
  slots_[head_] = std::move(entry);
  head_ = (head_ + 1) % slots_.size();
  return evicted;
}

void WindowBuffer::accumulate(Matrix& accum_a, Matrix& accum_b) const {
  for (std::size_t i = 0; i < size_; ++i) {
    const WindowEntry& e = at(i);
    accum_a.noalias() += e.coeffs * e.coeffs.transpose();
    accum_b.noalias() += (e.sample - e.sparse) * e.coeffs.transpose();
  }
}

// ---------------------------------------------------------------- config

TrackerConfig TrackerConfig::rule_of_thumb(Index m, Index n_win) {
  TrackerConfig c;
  const double root = std::sqrt(static_cast<double>(std::max(m, n_win)));
  c.lambda1 = 1.0 / root;
  c.lambda2 = 100.0 / root;
  c.n_win = n_win;
  c.n_burnin = n_win;
  return c;
}

void TrackerConfig::validate() const {
  require(lambda1 > 0.0 && lambda2 > 0.0, "tracker: lambda1 and lambda2 must be positive");
  require(n_win >= 1, "tracker: n_win must be positive");
  require(n_win <= n_burnin, "tracker: n_win must not exceed n_burnin");
  require(rank_tol > 0.0 && rank_tol < 1.0, "tracker: rank_tol must lie in (0, 1)");
  require(basis_sweeps >= 1, "tracker: basis_sweeps must be at least 1");
  require(drift_period <= 0 || drift_period >= n_win, "tracker: drift_period must be at least n_win");
  projection.validate();
  pcp.validate();
}

// ---------------------------------------------------------------- stoc

StocTracker::StocTracker(Index m, Index r, double lambda1, double lambda2, ProjectionConfig projection,
                         int basis_sweeps)
    : projection_(projection), sweeps_(basis_sweeps) {
  require(m >= 1 && r >= 1, "stoc: m and r must be positive");
  require(lambda1 > 0.0 && lambda2 > 0.0, "stoc: lambda1 and lambda2 must be positive");
  model_.basis = Matrix::Zero(m, r);
  model_.accum_a = Matrix::Zero(r, r);
  model_.accum_b = Matrix::Zero(m, r);
  model_.lambda1 = lambda1;
  model_.lambda2 = lambda2;
}

StocTracker::StocTracker(const BurninInit& init, double lambda1, double lambda2, ProjectionConfig projection,
                         int basis_sweeps)
    : projection_(projection), sweeps_(basis_sweeps) {
  require(lambda1 > 0.0 && lambda2 > 0.0, "stoc: lambda1 and lambda2 must be positive");
  require(init.basis.cols() == init.rank, "stoc: burn-in rank does not match its basis");
  model_.basis = init.basis;
  model_.accum_a = init.accum_a;
  model_.accum_b = init.accum_b;
  model_.lambda1 = lambda1;
  model_.lambda2 = lambda2;
}

StocTracker::StocTracker(SubspaceModel model, ProjectionConfig projection, int basis_sweeps)
    : model_(std::move(model)), projection_(projection), sweeps_(basis_sweeps) {}

StepOutput StocTracker::step(const Vector& sample) {
  require(sample.size() == model_.dim(), "stoc: sample has dimension " + std::to_string(sample.size()) +
                                             ", expected " + std::to_string(model_.dim()));
  Projection p = project_sample(model_.basis, sample, model_.lambda1, model_.lambda2, projection_);

  model_.accum_a.noalias() += p.coeffs * p.coeffs.transpose();
  model_.accum_b.noalias() += (sample - p.sparse) * p.coeffs.transpose();
  update_basis(model_.basis, model_.accum_a, model_.accum_b, model_.lambda1, sweeps_);
  ++model_.t;

  StepOutput out;
  out.low_rank = model_.basis * p.coeffs;
  out.coeffs = std::move(p.coeffs);
  out.sparse = std::move(p.sparse);
  out.projection_iterations = p.iterations;
  return out;
}

// ---------------------------------------------------------------- omw

OmwTracker::OmwTracker(const BurninInit& init, double lambda1, double lambda2, Index n_win,
                       ProjectionConfig projection, int basis_sweeps, std::int64_t drift_period) {
  require(lambda1 > 0.0 && lambda2 > 0.0, "omw: lambda1 and lambda2 must be positive");
  require(n_win >= 1, "omw: n_win must be positive");
  require(static_cast<Index>(init.window_seed.size()) == n_win,
          "omw: burn-in window seed holds " + std::to_string(init.window_seed.size()) + " entries, expected n_win = " +
              std::to_string(n_win));
  state_.model.basis = init.basis;
  state_.model.accum_a = init.accum_a;
  state_.model.accum_b = init.accum_b;
  state_.model.lambda1 = lambda1;
  state_.model.lambda2 = lambda2;
  state_.window = WindowBuffer(static_cast<std::size_t>(n_win));
  for (const auto& e : init.window_seed) state_.window.push(e);
  state_.drift_period = drift_period == 0 ? 10 * static_cast<std::int64_t>(n_win) : drift_period;
  state_.projection = projection;
  state_.basis_sweeps = basis_sweeps;
  state_.shadow_a = Matrix::Zero(init.rank, init.rank);
  state_.shadow_b = Matrix::Zero(init.basis.rows(), init.rank);
}

OmwTracker::OmwTracker(State state) : state_(std::move(state)) {
  const auto& m = state_.model;
  require(m.accum_a.rows() == m.rank() && m.accum_b.rows() == m.dim(), "omw: inconsistent state dimensions");
  require(state_.window.capacity() >= 1, "omw: window capacity must be positive");
}

StepOutput OmwTracker::step(const Vector& sample) {
  SubspaceModel& model = state_.model;
  WindowBuffer& window = state_.window;
  require(window.full(), "omw: window buffer holds " + std::to_string(window.size()) + " of " +
                             std::to_string(window.capacity()) + " entries");
  require(sample.size() == model.dim(), "omw: sample has dimension " + std::to_string(sample.size()) +
                                            ", expected " + std::to_string(model.dim()));

  Projection p = project_sample(model.basis, sample, model.lambda1, model.lambda2, state_.projection);

  const WindowEntry& old = window.oldest();
  model.accum_a.noalias() += p.coeffs * p.coeffs.transpose();
  model.accum_a.noalias() -= old.coeffs * old.coeffs.transpose();
  model.accum_b.noalias() += (sample - p.sparse) * p.coeffs.transpose();
  model.accum_b.noalias() -= (old.sample - old.sparse) * old.coeffs.transpose();

  // The add/subtract recursion drifts in floating point. The last n_win
  // steps of every drift period rebuild the window sums from scratch, in
  // arrival order, and the rebuilt sums replace A and B at the period end.
  const std::int64_t period = state_.drift_period;
  const std::int64_t n_win = static_cast<std::int64_t>(window.capacity());
  const std::int64_t phase = period > 0 ? static_cast<std::int64_t>(model.t % static_cast<std::uint64_t>(period)) : -1;
  const bool rebuilding = period > 0 && phase >= period - n_win;
  if (rebuilding) {
    if (phase == period - n_win) {
      state_.shadow_a.setZero();
      state_.shadow_b.setZero();
    }
    state_.shadow_a.noalias() += p.coeffs * p.coeffs.transpose();
    state_.shadow_b.noalias() += (sample - p.sparse) * p.coeffs.transpose();
    if (phase == period - 1) {
      model.accum_a = state_.shadow_a;
      model.accum_b = state_.shadow_b;
    }
  }

  update_basis(model.basis, model.accum_a, model.accum_b, model.lambda1, state_.basis_sweeps);
  ++model.t;

  StepOutput out;
  out.low_rank = model.basis * p.coeffs;
  out.projection_iterations = p.iterations;
  window.push(WindowEntry{sample, p.coeffs, p.sparse});
  out.coeffs = std::move(p.coeffs);
  out.sparse = std::move(p.sparse);
  return out;
}

std::size_t OmwTracker::state_element_count() const {
  const auto& m = state_.model;
  std::size_t n = static_cast<std::size_t>(m.basis.size() + m.accum_a.size() + m.accum_b.size());
  n += static_cast<std::size_t>(state_.shadow_a.size() + state_.shadow_b.size());
  for (std::size_t i = 0; i < state_.window.size(); ++i) {
    const auto& e = state_.window.at(i);
    n += static_cast<std::size_t>(e.sample.size() + e.coeffs.size() + e.sparse.size());
  }
  return n;
}

// ---------------------------------------------------------------- driver

namespace {

Matrix assemble(const std::vector<Vector>& cols, Index m) {
  Matrix out(m, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = cols[j];
  return out;
}

}  // namespace

DecompositionResult run_tracker(ObservationStream& stream, TrackerMode mode, const TrackerConfig& config,
                                const std::optional<Matrix>& burnin, Index stoc_zero_rank) {
  config.validate();
  DecompositionResult res;
  std::vector<Vector> low, sparse;
  Index m = stream.dim();

  std::optional<BurninInit> init;
  const Index first = stream.position();
  if (mode == TrackerMode::stoc && stoc_zero_rank > 0) {
    if (burnin) m = burnin->rows();
    if (m == 0) {
      res.warnings.push_back("empty stream: nothing to decompose");
      return res;
    }
  } else if (burnin) {
    m = burnin->rows();
    init = burnin_initialize(*burnin, config.n_win, config.pcp, config.rank_tol);
  } else {
    // the leading samples form the burn-in block
    std::vector<Vector> head;
    while (static_cast<Index>(head.size()) < config.n_burnin) {
      auto v = stream.next();
      if (!v) break;
      head.push_back(std::move(*v));
    }
    if (head.empty()) {
      res.warnings.push_back("empty stream: nothing to decompose");
      res.low_rank = Matrix(m, 0);
      res.sparse = Matrix(m, 0);
      return res;
    }
    const Matrix block = assemble(head, m);
    if (block.cols() < config.n_burnin) {
      PcpResult dec = pcp_alm(block, config.pcp);
      res.batch_tail = block.cols();
      res.warnings.push_back("stream shorter than n_burnin; decomposed by batch PCP only");
      res.low_rank = std::move(dec.low_rank);
      res.sparse = std::move(dec.sparse);
      return res;
    }
    init = burnin_initialize(block, config.n_win, config.pcp, config.rank_tol);
    for (Index j = 0; j < block.cols(); ++j) {
      low.emplace_back(init->low_rank.col(j));
      sparse.emplace_back(init->sparse.col(j));
    }
  }
  // an explicit burn-in block precedes the stream
  if (init) res.segments.push_back({burnin ? first - burnin->cols() : first, init->rank});

  auto drive = [&](auto& tracker) {
    while (auto v = stream.next()) {
      const Index t = stream.position() - 1;
      try {
        StepOutput out = tracker.step(*v);
        low.push_back(std::move(out.low_rank));
        sparse.push_back(std::move(out.sparse));
      } catch (const Error& e) {
        throw Error(e.code(), "sample " + std::to_string(t) + ": " + e.what());
      }
    }
  };

  if (mode == TrackerMode::stoc) {
    std::optional<StocTracker> tracker;
    if (init)
      tracker.emplace(*init, config.lambda1, config.lambda2, config.projection, config.basis_sweeps);
    else
      tracker.emplace(m, stoc_zero_rank, config.lambda1, config.lambda2, config.projection, config.basis_sweeps);
    drive(*tracker);
  } else {
    OmwTracker tracker(*init, config.lambda1, config.lambda2, config.n_win, config.projection, config.basis_sweeps,
                       config.drift_period);
    drive(tracker);
  }

  res.low_rank = assemble(low, m);
  res.sparse = assemble(sparse, m);
  return res;
}

}  // namespace orpca
