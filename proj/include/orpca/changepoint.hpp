#pragma once

#include <orpca/tracker.hpp>
#include <orpca/types.hpp>

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace orpca {

/// Number of entries with |s_i| > zero_eps.
Index support_size(const Vector& s, double zero_eps = 0.0);

/// counts[c] = number of recorded observations whose support size was c.
class SupportHistogram {
 public:
  SupportHistogram() = default;
  explicit SupportHistogram(Index m) : counts_(static_cast<std::size_t>(m + 1), 0) {}

  void record(Index c);
  void clear();
  std::uint64_t total() const { return total_; }
  std::uint64_t count(Index c) const;
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  /// Fraction of recorded sizes >= max(c - n_tol, 0).
  double p_value(Index c, Index n_tol = 0) const;

  static SupportHistogram from_counts(std::vector<std::uint64_t> counts);

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Free-function form of SupportHistogram::p_value.
inline double p_value(const SupportHistogram& hist, Index c, Index n_tol) { return hist.p_value(c, n_tol); }

/// 1 iff p <= alpha.
inline int flag_observation(double p, double alpha) { return p <= alpha ? 1 : 0; }

/// Recent support sizes and abnormality flags, with their time indices.
struct FlagBuffers {
  std::size_t capacity = 0;  // N_check
  std::deque<Index> counts;
  std::deque<int> flags;
  std::deque<Index> times;

  std::size_t size() const { return flags.size(); }
  void clear();
};

/// Appends (c, f); once the buffers exceed N_check the oldest entry is
/// dropped and its count goes into the histogram. Returns the time index of
/// the evicted entry, if any.
std::optional<Index> buffer_advance(FlagBuffers& buffers, SupportHistogram& hist, Index c, int f, Index t);

/// When at least alpha_prop * N_check flags are raised, the time of the
/// first run of n_positive consecutive flags (oldest first).
std::optional<Index> scan_for_changepoint(const FlagBuffers& buffers, double alpha_prop, std::size_t n_check,
                                          std::size_t n_positive);

struct CpConfig {
  TrackerConfig tracker;
  Index n_cp_burnin = 100;
  Index n_test = 100;
  std::size_t n_check = 20;
  double alpha = 0.01;
  double alpha_prop = 0.5;
  std::size_t n_positive = 3;
  Index n_tol = 0;
  double zero_eps = 0.0;

  void validate() const;
  /// Soft constraints that are not errors (e.g. N_check >= n_win / 2).
  std::vector<std::string> advisories() const;
};

/// tracking marks samples of the plain trackers, which have no test phases.
enum class CpPhase { burnin, cp_burnin, test_fill, monitoring, batch_tail, tracking };
const char* to_string(CpPhase phase);

struct CpDiagnostic {
  Index t = 0;
  Index support = 0;
  std::optional<double> p;
  std::optional<int> flag;
  CpPhase phase = CpPhase::burnin;
};

/// A finalized per-sample decomposition.
struct CpOutput {
  Index t = 0;
  Vector low_rank;
  Vector sparse;
  CpDiagnostic diag;
};

struct Detection {
  Index change_point = 0;  // t0, start of the first run of flags
  Index detected_at = 0;   // sample at which the scan fired
};

struct ChangePointReport {
  std::vector<Index> change_points;
  std::vector<Detection> detections;
  std::vector<CpDiagnostic> diagnostics;  // one per finalized sample
  std::vector<DecompositionResult::Segment> segments;
  Index batch_tail = 0;
  std::vector<std::string> warnings;
};

/// Online moving-window RPCA with embedded change-point detection.
///
/// Samples are pushed one at a time. Outputs become final once they can no
/// longer be revised by a restart: immediately outside the monitoring phase,
/// and when they leave the flag buffer inside it. On a detection at t0 the
/// samples from t0 on are replayed into a fresh burn-in, so the detector
/// retains at most N_check recent samples beyond the burn-in block.
class ChangePointDetector {
 public:
  /// Burn-in is taken from the first n_burnin pushed samples.
  ChangePointDetector(Index m, CpConfig config, bool detection_enabled = true);
  /// Burn-in block supplied up front; its samples produce no outputs.
  ChangePointDetector(const Matrix& burnin, CpConfig config, bool detection_enabled = true);

  void push(const Vector& sample);
  /// Flushes provisional outputs and decomposes an incomplete burn-in block
  /// by batch PCP.
  void finish();

  /// Moves out all outputs finalized so far, in time order.
  std::vector<CpOutput> take_outputs();

  Index dim() const { return state_.dim; }
  Index next_index() const { return state_.next_t; }
  CpPhase phase() const { return state_.phase; }
  const std::vector<Index>& change_points() const { return state_.change_points; }
  const std::vector<Detection>& detections() const { return state_.detections; }
  const std::vector<DecompositionResult::Segment>& segments() const { return state_.segments; }
  const SupportHistogram& histogram() const { return state_.hist; }
  const FlagBuffers& buffers() const { return state_.buffers; }
  const OmwTracker* tracker() const { return state_.tracker ? &*state_.tracker : nullptr; }
  Index batch_tail() const { return state_.batch_tail; }

  struct Provisional {
    Vector sample;
    CpOutput output;
  };

  /// Complete detector state, exposed for persistence.
  struct State {
    CpConfig config;
    bool detection_enabled = true;
    Index dim = 0;
    CpPhase phase = CpPhase::burnin;
    Index next_t = 0;       // absolute index of the next pushed sample
    Index phase_start = 0;  // first sample after the current burn-in
    Index pending_start = 0;
    std::vector<Vector> pending;  // burn-in samples being collected
    std::optional<OmwTracker> tracker;
    SupportHistogram hist;
    FlagBuffers buffers;
    std::deque<Provisional> provisional;  // mirrors the flag buffer
    std::deque<CpOutput> ready;
    std::vector<Index> change_points;
    std::vector<Detection> detections;
    std::vector<DecompositionResult::Segment> segments;
    Index batch_tail = 0;
    bool finished = false;
  };
  explicit ChangePointDetector(State state);
  const State& state() const { return state_; }

 private:
  void start_from_burnin(const Matrix& block, Index start, bool emit);
  void track(const Vector& sample);
  void restart(Index t0);
  void finalize_front();

  State state_;
};

/// Runs the detector over a stream. Without an explicit burn-in block the
/// first n_burnin samples form it.
std::pair<DecompositionResult, ChangePointReport> omwrpca_cp_run(
    ObservationStream& stream, const CpConfig& config, const std::optional<Matrix>& burnin = std::nullopt,
    bool detection_enabled = true);

}  // namespace orpca
