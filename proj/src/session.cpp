#include <orpca/session.hpp>

namespace orpca {

SessionMode parse_session_mode(const std::string& name) {
  if (name == "stoc") return SessionMode::stoc;
  if (name == "omw") return SessionMode::omw;
  if (name == "omw-cp") return SessionMode::omw_cp;
  fail(Errc::contract_violation, "unknown mode '" + name + "' (expected stoc, omw or omw-cp)");
}

const char* to_string(SessionMode mode) {
  switch (mode) {
    case SessionMode::stoc: return "stoc";
    case SessionMode::omw: return "omw";
    case SessionMode::omw_cp: return "omw-cp";
  }
  return "unknown";
}

OnlineSession::OnlineSession(SessionMode mode, Index m, const CpConfig& config, const std::optional<Matrix>& burnin,
                             bool detection_enabled, Index stoc_zero_rank)
    : mode_(mode), dim_(burnin ? burnin->rows() : m), config_(config) {
  config_.validate();
  require(dim_ >= 1, "session: sample dimension must be positive");
  require(!burnin || m == burnin->rows(), "session: burn-in block has " + std::to_string(burnin ? burnin->rows() : 0) +
                                             " rows but the sample dimension is " + std::to_string(m));
  require(stoc_zero_rank >= 0, "session: zero-start rank must be nonnegative");
  require(stoc_zero_rank == 0 || mode == SessionMode::stoc, "session: zero start applies to stoc only");
  const TrackerConfig& tc = config_.tracker;

  if (mode == SessionMode::omw_cp) {
    if (burnin)
      detector_.emplace(*burnin, config_, detection_enabled);
    else
      detector_.emplace(dim_, config_, detection_enabled);
    return;
  }
  if (stoc_zero_rank > 0) {
    stoc_.emplace(dim_, stoc_zero_rank, tc.lambda1, tc.lambda2, tc.projection, tc.basis_sweeps);
    segments_.push_back({0, stoc_zero_rank});
    return;
  }
  if (burnin) {
    require(burnin->cols() >= tc.n_win, "session: burn-in block has fewer columns than n_win");
    start_tracker(burnin_initialize(*burnin, tc.n_win, tc.pcp, tc.rank_tol));
    segments_.push_back({-burnin->cols(), rank()});
  }
}

void OnlineSession::start_tracker(const BurninInit& init) {
  const TrackerConfig& tc = config_.tracker;
  if (mode_ == SessionMode::stoc)
    stoc_.emplace(init, tc.lambda1, tc.lambda2, tc.projection, tc.basis_sweeps);
  else
    omw_.emplace(init, tc.lambda1, tc.lambda2, tc.n_win, tc.projection, tc.basis_sweeps, tc.drift_period);
}

void OnlineSession::emit_plain(Index t, const StepOutput& step) {
  CpOutput out;
  out.t = t;
  out.low_rank = step.low_rank;
  out.sparse = step.sparse;
  out.diag.t = t;
  out.diag.support = support_size(step.sparse, config_.zero_eps);
  out.diag.phase = CpPhase::tracking;
  ready_.push_back(std::move(out));
}

void OnlineSession::push(const Vector& sample) {
  require(!finished_, "session: push after finish");
  require(sample.size() == dim_, "session: sample has dimension " + std::to_string(sample.size()) + ", expected " +
                                     std::to_string(dim_));
  require_finite(sample, "sample");
  const Index t = static_cast<Index>(cursor_++);
  if (detector_) {
    detector_->push(sample);
    return;
  }

  if (!stoc_ && !omw_) {
    if (pending_.empty()) pending_start_ = t;
    pending_.push_back(sample);
    if (static_cast<Index>(pending_.size()) < config_.tracker.n_burnin) return;
    Matrix block(dim_, static_cast<Index>(pending_.size()));
    for (std::size_t j = 0; j < pending_.size(); ++j) block.col(static_cast<Index>(j)) = pending_[j];
    pending_.clear();
    const TrackerConfig& tc = config_.tracker;
    BurninInit init = burnin_initialize(block, tc.n_win, tc.pcp, tc.rank_tol);
    for (Index j = 0; j < block.cols(); ++j) {
      CpOutput out;
      out.t = pending_start_ + j;
      out.low_rank = init.low_rank.col(j);
      out.sparse = init.sparse.col(j);
      out.diag = CpDiagnostic{out.t, support_size(out.sparse, config_.zero_eps), std::nullopt, std::nullopt,
                              CpPhase::burnin};
      ready_.push_back(std::move(out));
    }
    start_tracker(init);
    segments_.push_back({pending_start_, init.rank});
    return;
  }

  try {
    emit_plain(t, stoc_ ? stoc_->step(sample) : omw_->step(sample));
  } catch (const Error& e) {
    throw Error(e.code(), "sample " + std::to_string(t) + ": " + e.what());
  }
}

void OnlineSession::finish() {
  if (finished_) return;
  finished_ = true;
  if (detector_) {
    detector_->finish();
    return;
  }
  if (pending_.empty()) return;
  Matrix block(dim_, static_cast<Index>(pending_.size()));
  for (std::size_t j = 0; j < pending_.size(); ++j) block.col(static_cast<Index>(j)) = pending_[j];
  const PcpResult dec = pcp_alm(block, config_.tracker.pcp);
  for (Index j = 0; j < block.cols(); ++j) {
    CpOutput out;
    out.t = pending_start_ + j;
    out.low_rank = dec.low_rank.col(j);
    out.sparse = dec.sparse.col(j);
    out.diag = CpDiagnostic{out.t, support_size(out.sparse, config_.zero_eps), std::nullopt, std::nullopt,
                            CpPhase::batch_tail};
    ready_.push_back(std::move(out));
  }
  batch_tail_ = block.cols();
  pending_.clear();
}

std::vector<CpOutput> OnlineSession::take_outputs() {
  if (detector_) return detector_->take_outputs();
  std::vector<CpOutput> out(std::make_move_iterator(ready_.begin()), std::make_move_iterator(ready_.end()));
  ready_.clear();
  return out;
}

Index OnlineSession::rank() const {
  if (detector_) return detector_->tracker() ? detector_->tracker()->model().rank() : 0;
  if (stoc_) return stoc_->model().rank();
  if (omw_) return omw_->model().rank();
  return 0;
}

std::vector<Index> OnlineSession::change_points() const {
  return detector_ ? detector_->change_points() : std::vector<Index>{};
}

std::vector<Detection> OnlineSession::detections() const {
  return detector_ ? detector_->detections() : std::vector<Detection>{};
}

std::vector<DecompositionResult::Segment> OnlineSession::segments() const {
  return detector_ ? detector_->segments() : segments_;
}

Index OnlineSession::batch_tail() const { return detector_ ? detector_->batch_tail() : batch_tail_; }

std::size_t OnlineSession::state_element_count() const {
  if (detector_) return detector_->tracker() ? detector_->tracker()->state_element_count() : 0;
  if (omw_) return omw_->state_element_count();
  if (stoc_) {
    const auto& m = stoc_->model();
    return static_cast<std::size_t>(m.basis.size() + m.accum_a.size() + m.accum_b.size());
  }
  return 0;
}

std::string OnlineSession::snapshot() const {
  if (detector_) return serialize_snapshot(*detector_, cursor_);
  require(!finished_, "session: cannot snapshot a finished session");
  require(stoc_ || omw_, "session: burn-in incomplete (" + std::to_string(pending_.size()) + " of " +
                             std::to_string(config_.tracker.n_burnin) + " samples); nothing to snapshot yet");
  require(ready_.empty(), "session: take outputs before taking a snapshot");
  return stoc_ ? serialize_snapshot(*stoc_, cursor_, config_.zero_eps)
               : serialize_snapshot(*omw_, cursor_, config_.zero_eps);
}

OnlineSession OnlineSession::restore(const std::string& bytes) {
  Snapshot snap = deserialize_snapshot(bytes);
  OnlineSession s;
  s.cursor_ = snap.cursor;
  s.config_.zero_eps = snap.zero_eps;
  switch (snap.kind) {
    case SnapshotKind::stoc:
      s.mode_ = SessionMode::stoc;
      s.dim_ = snap.stoc->model().dim();
      s.stoc_ = std::move(snap.stoc);
      break;
    case SnapshotKind::omw:
      s.mode_ = SessionMode::omw;
      s.dim_ = snap.omw->model().dim();
      s.omw_ = std::move(snap.omw);
      break;
    case SnapshotKind::changepoint:
      s.mode_ = SessionMode::omw_cp;
      s.dim_ = snap.changepoint->dim();
      s.config_ = snap.changepoint->state().config;
      s.detector_ = std::move(snap.changepoint);
      break;
  }
  return s;
}

}  // namespace orpca
