#pragma once

#include <orpca/changepoint.hpp>
#include <orpca/snapshot.hpp>
#include <orpca/tracker.hpp>

#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace orpca {

enum class SessionMode { stoc, omw, omw_cp };
SessionMode parse_session_mode(const std::string& name);
const char* to_string(SessionMode mode);

/// Push-based front end shared by the three online methods. Handles the
/// burn-in block (collected from the first n_burnin samples unless given),
/// buffers finalized outputs, and snapshots the complete state.
class OnlineSession {
 public:
  /// stoc_zero_rank > 0 starts STOC from U = 0 with that rank and no burn-in.
  OnlineSession(SessionMode mode, Index m, const CpConfig& config, const std::optional<Matrix>& burnin = std::nullopt,
                bool detection_enabled = true, Index stoc_zero_rank = 0);

  void push(const Vector& sample);
  void finish();
  std::vector<CpOutput> take_outputs();

  SessionMode mode() const { return mode_; }
  Index dim() const { return dim_; }
  /// Number of samples pushed so far.
  std::uint64_t cursor() const { return cursor_; }
  /// Rank of the current basis, 0 during burn-in.
  Index rank() const;
  std::vector<Index> change_points() const;
  std::vector<Detection> detections() const;
  std::vector<DecompositionResult::Segment> segments() const;
  Index batch_tail() const;
  /// Doubles held by the tracker state (0 before burn-in completes).
  std::size_t state_element_count() const;

  /// Snapshots require a completed burn-in for stoc and omw.
  std::string snapshot() const;
  static OnlineSession restore(const std::string& bytes);

 private:
  OnlineSession() = default;
  void start_tracker(const BurninInit& init);
  void emit_plain(Index t, const StepOutput& step);

  SessionMode mode_ = SessionMode::omw;
  Index dim_ = 0;
  CpConfig config_;
  std::uint64_t cursor_ = 0;
  bool finished_ = false;

  // stoc / omw
  std::vector<Vector> pending_;
  Index pending_start_ = 0;
  std::optional<StocTracker> stoc_;
  std::optional<OmwTracker> omw_;
  std::vector<DecompositionResult::Segment> segments_;
  Index batch_tail_ = 0;
  std::deque<CpOutput> ready_;

  // omw-cp
  std::optional<ChangePointDetector> detector_;
};

}  // namespace orpca
