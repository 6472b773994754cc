#include <orpca/changepoint.hpp>
#include <orpca/stream.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace orpca {

Index support_size(const Vector& s, double zero_eps) {
  return static_cast<Index>((s.array().abs() > zero_eps).count());
}

// ---------------------------------------------------------------- histogram

void SupportHistogram::record(Index c) {
  require(c >= 0 && static_cast<std::size_t>(c) < counts_.size(),
          "histogram: support size " + std::to_string(c) + " out of range");
  ++counts_[static_cast<std::size_t>(c)];
  ++total_;
}

void SupportHistogram::clear() {
  std::fill(counts_.begin(), counts_.end(), 0);
  total_ = 0;
}

std::uint64_t SupportHistogram::count(Index c) const {
  if (c < 0 || static_cast<std::size_t>(c) >= counts_.size()) return 0;
  return counts_[static_cast<std::size_t>(c)];
}

double SupportHistogram::p_value(Index c, Index n_tol) const {
  require(total_ > 0, "p_value: empty histogram");
  require(c >= 0 && n_tol >= 0, "p_value: negative support size or tolerance");
  const std::size_t lo = static_cast<std::size_t>(std::max<Index>(c - n_tol, 0));
  std::uint64_t above = 0;
  for (std::size_t i = lo; i < counts_.size(); ++i) above += counts_[i];
  return static_cast<double>(above) / static_cast<double>(total_);
}

SupportHistogram SupportHistogram::from_counts(std::vector<std::uint64_t> counts) {
  SupportHistogram h;
  h.counts_ = std::move(counts);
  for (auto c : h.counts_) h.total_ += c;
  return h;
}

// ---------------------------------------------------------------- buffers

void FlagBuffers::clear() {
  counts.clear();
  flags.clear();
  times.clear();
}

std::optional<Index> buffer_advance(FlagBuffers& buffers, SupportHistogram& hist, Index c, int f, Index t) {
  require(buffers.capacity >= 1, "flag buffers: capacity must be positive");
  buffers.counts.push_back(c);
  buffers.flags.push_back(f);
  buffers.times.push_back(t);
  if (buffers.size() < buffers.capacity + 1) return std::nullopt;

  const Index aged = buffers.counts.front();
  const Index aged_t = buffers.times.front();
  buffers.counts.pop_front();
  buffers.flags.pop_front();
  buffers.times.pop_front();
  hist.record(aged);
  return aged_t;
}

std::optional<Index> scan_for_changepoint(const FlagBuffers& buffers, double alpha_prop, std::size_t n_check,
                                          std::size_t n_positive) {
  require(buffers.size() == n_check, "scan: flag buffer must hold exactly N_check entries");
  require(n_positive >= 1, "scan: n_positive must be positive");
  std::size_t abnormal = 0;
  for (int f : buffers.flags) abnormal += static_cast<std::size_t>(f);
  if (static_cast<double>(abnormal) < alpha_prop * static_cast<double>(n_check)) return std::nullopt;

  std::size_t run = 0;
  for (std::size_t i = 0; i < buffers.flags.size(); ++i) {
    run = buffers.flags[i] ? run + 1 : 0;
    if (run == n_positive) return buffers.times[i + 1 - n_positive];
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- config

void CpConfig::validate() const {
  tracker.validate();
  require(n_cp_burnin >= 0, "cp: n_cp_burnin must be nonnegative");
  require(n_test >= 1, "cp: n_test must be positive");
  require(n_check >= 1, "cp: N_check must be positive");
  require(n_positive >= 1 && n_positive <= n_check, "cp: n_positive must lie in [1, N_check]");
  require(alpha > 0.0 && alpha < 1.0, "cp: alpha must lie in (0, 1)");
  require(alpha_prop > 0.0 && alpha_prop <= 1.0, "cp: alpha_prop must lie in (0, 1]");
  require(n_tol >= 0, "cp: n_tol must be nonnegative");
  require(zero_eps >= 0.0, "cp: zero_eps must be nonnegative");
}

std::vector<std::string> CpConfig::advisories() const {
  std::vector<std::string> out;
  if (2 * static_cast<Index>(n_check) >= tracker.n_win)
    out.push_back("N_check should be smaller than n_win / 2 to avoid missing change points");
  return out;
}

const char* to_string(CpPhase phase) {
  switch (phase) {
    case CpPhase::burnin: return "burnin";
    case CpPhase::cp_burnin: return "cp_burnin";
    case CpPhase::test_fill: return "test_fill";
    case CpPhase::monitoring: return "monitoring";
    case CpPhase::batch_tail: return "batch_tail";
    case CpPhase::tracking: return "tracking";
  }
  return "unknown";
}

// ---------------------------------------------------------------- detector

ChangePointDetector::ChangePointDetector(Index m, CpConfig config, bool detection_enabled) {
  config.validate();
  require(m >= 1, "cp: sample dimension must be positive");
  state_.config = std::move(config);
  state_.detection_enabled = detection_enabled;
  state_.dim = m;
  state_.hist = SupportHistogram(m);
  state_.buffers.capacity = state_.config.n_check;
}

ChangePointDetector::ChangePointDetector(const Matrix& burnin, CpConfig config, bool detection_enabled)
    : ChangePointDetector(burnin.rows(), std::move(config), detection_enabled) {
  start_from_burnin(burnin, -burnin.cols(), false);
  state_.phase_start = 0;
}

ChangePointDetector::ChangePointDetector(State state) : state_(std::move(state)) {
  state_.config.validate();
  require(state_.dim >= 1, "cp: sample dimension must be positive");
  require(state_.hist.counts().size() == static_cast<std::size_t>(state_.dim + 1), "cp: histogram size mismatch");
  require(state_.provisional.size() == state_.buffers.size(), "cp: provisional outputs out of sync with buffers");
}

void ChangePointDetector::start_from_burnin(const Matrix& block, Index start, bool emit) {
  const TrackerConfig& tc = state_.config.tracker;
  BurninInit init = burnin_initialize(block, tc.n_win, tc.pcp, tc.rank_tol);
  state_.tracker.emplace(init, tc.lambda1, tc.lambda2, tc.n_win, tc.projection, tc.basis_sweeps, tc.drift_period);
  state_.segments.push_back({start, init.rank});

  if (emit) {
    for (Index j = 0; j < block.cols(); ++j) {
      CpOutput out;
      out.t = start + j;
      out.low_rank = init.low_rank.col(j);
      out.sparse = init.sparse.col(j);
      out.diag = CpDiagnostic{out.t, support_size(out.sparse, state_.config.zero_eps), std::nullopt, std::nullopt,
                              CpPhase::burnin};
      state_.ready.push_back(std::move(out));
    }
  }
  state_.phase = CpPhase::cp_burnin;
  state_.phase_start = start + block.cols();
  state_.hist.clear();
  state_.buffers.clear();
}

void ChangePointDetector::push(const Vector& sample) {
  require(!state_.finished, "cp: push after finish");
  require(sample.size() == state_.dim, "cp: sample has dimension " + std::to_string(sample.size()) + ", expected " +
                                           std::to_string(state_.dim));
  require_finite(sample, "cp sample");
  track(sample);
}

void ChangePointDetector::track(const Vector& sample) {
  const Index t = state_.next_t++;

  if (state_.phase == CpPhase::burnin) {
    if (state_.pending.empty()) state_.pending_start = t;
    state_.pending.push_back(sample);
    if (static_cast<Index>(state_.pending.size()) == state_.config.tracker.n_burnin) {
      Matrix block(state_.dim, static_cast<Index>(state_.pending.size()));
      for (std::size_t j = 0; j < state_.pending.size(); ++j) block.col(static_cast<Index>(j)) = state_.pending[j];
      state_.pending.clear();
      start_from_burnin(block, state_.pending_start, true);
    }
    return;
  }

  StepOutput step;
  try {
    step = state_.tracker->step(sample);
  } catch (const Error& e) {
    throw Error(e.code(), "sample " + std::to_string(t) + ": " + e.what());
  }

  const CpConfig& cfg = state_.config;
  CpOutput out;
  out.t = t;
  out.diag.t = t;
  out.diag.support = support_size(step.sparse, cfg.zero_eps);
  out.low_rank = std::move(step.low_rank);
  out.sparse = std::move(step.sparse);

  const Index offset = t - state_.phase_start;
  if (offset < cfg.n_cp_burnin) {
    state_.phase = out.diag.phase = CpPhase::cp_burnin;
    state_.ready.push_back(std::move(out));
    return;
  }
  if (offset < cfg.n_cp_burnin + cfg.n_test) {
    state_.phase = out.diag.phase = CpPhase::test_fill;
    state_.hist.record(out.diag.support);
    state_.ready.push_back(std::move(out));
    return;
  }

  state_.phase = out.diag.phase = CpPhase::monitoring;
  if (!state_.detection_enabled) {
    state_.ready.push_back(std::move(out));
    return;
  }

  const double p = state_.hist.p_value(out.diag.support, cfg.n_tol);
  const int f = flag_observation(p, cfg.alpha);
  out.diag.p = p;
  out.diag.flag = f;
  const Index c = out.diag.support;
  state_.provisional.push_back(Provisional{sample, std::move(out)});
  if (buffer_advance(state_.buffers, state_.hist, c, f, t)) finalize_front();

  if (state_.buffers.size() == cfg.n_check) {
    if (auto t0 = scan_for_changepoint(state_.buffers, cfg.alpha_prop, cfg.n_check, cfg.n_positive)) {
      state_.detections.push_back({*t0, t});
      state_.change_points.push_back(*t0);
      restart(*t0);
    }
  }
}

void ChangePointDetector::finalize_front() {
  state_.ready.push_back(std::move(state_.provisional.front().output));
  state_.provisional.pop_front();
}

void ChangePointDetector::restart(Index t0) {
  while (!state_.provisional.empty() && state_.provisional.front().output.t < t0) finalize_front();

  std::vector<Vector> replay;
  for (auto& p : state_.provisional) replay.push_back(std::move(p.sample));
  state_.provisional.clear();
  state_.tracker.reset();
  state_.hist.clear();
  state_.buffers.clear();
  state_.pending.clear();
  state_.phase = CpPhase::burnin;

  // replay from t0; the replayed samples cannot reach monitoring again
  state_.next_t = t0;
  for (const Vector& v : replay) track(v);
}

void ChangePointDetector::finish() {
  if (state_.finished) return;
  while (!state_.provisional.empty()) finalize_front();
  if (!state_.pending.empty()) {
    Matrix block(state_.dim, static_cast<Index>(state_.pending.size()));
    for (std::size_t j = 0; j < state_.pending.size(); ++j) block.col(static_cast<Index>(j)) = state_.pending[j];
    const PcpResult dec = pcp_alm(block, state_.config.tracker.pcp);
    for (Index j = 0; j < block.cols(); ++j) {
      CpOutput out;
      out.t = state_.pending_start + j;
      out.low_rank = dec.low_rank.col(j);
      out.sparse = dec.sparse.col(j);
      out.diag = CpDiagnostic{out.t, support_size(out.sparse, state_.config.zero_eps), std::nullopt, std::nullopt,
                              CpPhase::batch_tail};
      state_.ready.push_back(std::move(out));
    }
    state_.batch_tail = block.cols();
    state_.pending.clear();
    state_.phase = CpPhase::batch_tail;
  }
  state_.finished = true;
}

std::vector<CpOutput> ChangePointDetector::take_outputs() {
  std::vector<CpOutput> out(std::make_move_iterator(state_.ready.begin()), std::make_move_iterator(state_.ready.end()));
  state_.ready.clear();
  return out;
}

std::pair<DecompositionResult, ChangePointReport> omwrpca_cp_run(ObservationStream& stream, const CpConfig& config,
                                                                 const std::optional<Matrix>& burnin,
                                                                 bool detection_enabled) {
  config.validate();
  DecompositionResult res;
  ChangePointReport report;
  report.warnings = config.advisories();

  const Index m = burnin ? burnin->rows() : stream.dim();
  if (m == 0) {
    report.warnings.push_back("empty stream: nothing to decompose");
    return {std::move(res), std::move(report)};
  }

  std::optional<ChangePointDetector> det;
  if (burnin)
    det.emplace(*burnin, config, detection_enabled);
  else
    det.emplace(m, config, detection_enabled);

  std::vector<Vector> low, sparse;
  const Index first = stream.position();
  auto collect = [&] {
    for (CpOutput& o : det->take_outputs()) {
      require(o.t == static_cast<Index>(low.size()), "cp: outputs finalized out of order");
      o.diag.t += first;
      low.push_back(std::move(o.low_rank));
      sparse.push_back(std::move(o.sparse));
      report.diagnostics.push_back(o.diag);
    }
  };

  while (auto v = stream.next()) {
    det->push(*v);
    collect();
  }
  det->finish();
  collect();

  res.low_rank.resize(m, static_cast<Index>(low.size()));
  res.sparse.resize(m, static_cast<Index>(sparse.size()));
  for (std::size_t j = 0; j < low.size(); ++j) {
    res.low_rank.col(static_cast<Index>(j)) = low[j];
    res.sparse.col(static_cast<Index>(j)) = sparse[j];
  }
  // detector indices count from the first sample it saw
  for (Index cp : det->change_points()) res.change_points.push_back(first + cp);
  for (auto seg : det->segments()) {
    seg.start += first;
    res.segments.push_back(seg);
  }
  res.batch_tail = det->batch_tail();
  report.change_points = res.change_points;
  for (auto d : det->detections()) report.detections.push_back({first + d.change_point, first + d.detected_at});
  report.segments = res.segments;
  report.batch_tail = res.batch_tail;
  if (res.batch_tail > 0) {
    const std::string w = "last " + std::to_string(res.batch_tail) +
                          " samples did not fill a burn-in block and were decomposed by batch PCP";
    report.warnings.push_back(w);
    res.warnings.push_back(w);
  }
  return {std::move(res), std::move(report)};
}

}  // namespace orpca
