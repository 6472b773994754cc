#pragma once

#include <orpca/pcp.hpp>
#include <orpca/projection.hpp>
#include <orpca/types.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace orpca {

class ObservationStream;

/// Mutable state shared by both online trackers.
struct SubspaceModel {
  Matrix basis;    // U, m x r
  Matrix accum_a;  // A, r x r
  Matrix accum_b;  // B, m x r
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::uint64_t t = 0;  // samples consumed

  Index dim() const { return basis.rows(); }
  Index rank() const { return basis.cols(); }
};

/// Fixed-capacity FIFO of the most recent window entries.
class WindowBuffer {
 public:
  WindowBuffer() = default;
  explicit WindowBuffer(std::size_t capacity);

  std::size_t capacity() const { return slots_.size(); }
  std::size_t size() const { return size_; }
  bool full() const { return size_ == slots_.size(); }

  /// i = 0 is the oldest entry.
  const WindowEntry& at(std::size_t i) const;
  const WindowEntry& oldest() const { return at(0); }

  /// Appends; when full, the oldest entry is evicted and returned.
  std::optional<WindowEntry> push(WindowEntry entry);

  /// Sum of v v^T and (m - s) v^T over the contents, oldest first.
  void accumulate(Matrix& accum_a, Matrix& accum_b) const;

 private:
  std::vector<WindowEntry> slots_;
  std::size_t head_ = 0;  // index of the oldest entry
  std::size_t size_ = 0;
};

struct StepOutput {
  Vector coeffs;     // v_t
  Vector sparse;     // s_t
  Vector low_rank;   // l_t = U_t v_t with the post-update basis
  int projection_iterations = 0;
};

struct TrackerConfig {
  double lambda1 = 0.1;
  double lambda2 = 10.0;
  Index n_win = 100;
  Index n_burnin = 100;
  ProjectionConfig projection;
  PcpConfig pcp;
  double rank_tol = 1e-6;
  int basis_sweeps = 1;
  /// Accumulators are rebuilt from the window every this many steps; 0
  /// selects 10 * n_win, negative disables the rebuild.
  std::int64_t drift_period = 0;

  /// lambda1 = 1/sqrt(max(m, n_win)), lambda2 = 100/sqrt(max(m, n_win)).
  static TrackerConfig rule_of_thumb(Index m, Index n_win);
  void validate() const;
};

/// Online robust PCA by stochastic optimization: accumulators grow with
/// every sample.
class StocTracker {
 public:
  /// Literal zero start with a caller-chosen rank.
  StocTracker(Index m, Index r, double lambda1, double lambda2, ProjectionConfig projection = {},
              int basis_sweeps = 1);
  /// Start from a burn-in decomposition.
  StocTracker(const BurninInit& init, double lambda1, double lambda2, ProjectionConfig projection = {},
              int basis_sweeps = 1);
  explicit StocTracker(SubspaceModel model, ProjectionConfig projection = {}, int basis_sweeps = 1);

  StepOutput step(const Vector& sample);

  const SubspaceModel& model() const { return model_; }
  const ProjectionConfig& projection() const { return projection_; }
  int basis_sweeps() const { return sweeps_; }

 private:
  SubspaceModel model_;
  ProjectionConfig projection_;
  int sweeps_ = 1;
};

/// Online moving-window robust PCA: accumulators cover exactly the last
/// n_win samples.
class OmwTracker {
 public:
  OmwTracker(const BurninInit& init, double lambda1, double lambda2, Index n_win,
             ProjectionConfig projection = {}, int basis_sweeps = 1, std::int64_t drift_period = 0);

  /// Restores a tracker from its complete state.
  struct State {
    SubspaceModel model;
    WindowBuffer window;
    Matrix shadow_a;
    Matrix shadow_b;
    std::int64_t drift_period = 0;
    ProjectionConfig projection;
    int basis_sweeps = 1;
  };
  explicit OmwTracker(State state);

  StepOutput step(const Vector& sample);

  const SubspaceModel& model() const { return state_.model; }
  const WindowBuffer& window() const { return state_.window; }
  const State& state() const { return state_; }
  Index n_win() const { return static_cast<Index>(state_.window.capacity()); }

  /// Number of doubles held by the tracker (basis, accumulators, window,
  /// rebuild shadow). Independent of the number of samples consumed.
  std::size_t state_element_count() const;

 private:
  State state_;
};

enum class TrackerMode { stoc, omw };

/// Per-sample outputs of a whole run plus bookkeeping.
struct DecompositionResult {
  Matrix low_rank;  // m x T
  Matrix sparse;    // m x T
  std::vector<Index> change_points;
  struct Segment {
    Index start = 0;  // absolute index of the first burn-in sample of the segment
    Index rank = 0;
  };
  std::vector<Segment> segments;
  /// Samples at the end of the stream decomposed by batch PCP because a
  /// full burn-in could not be collected.
  Index batch_tail = 0;
  std::vector<std::string> warnings;
};

/// Runs a tracker over the whole stream. Without an explicit burn-in block
/// the first n_burnin samples form it and are decomposed by batch PCP.
/// stoc_zero_rank > 0 selects the literal zero initialization for stoc.
DecompositionResult run_tracker(ObservationStream& stream, TrackerMode mode, const TrackerConfig& config,
                                const std::optional<Matrix>& burnin = std::nullopt, Index stoc_zero_rank = 0);

}  // namespace orpca
