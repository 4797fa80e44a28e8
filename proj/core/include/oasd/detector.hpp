#ifndef OASD_DETECTOR_HPP
#define OASD_DETECTOR_HPP

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oasd/asdnet.hpp"
#include "oasd/groupstats.hpp"
#include "oasd/roadnet.hpp"
#include "oasd/rsrnet.hpp"

namespace oasd {

namespace detail {
class OnlineLabeler;
}

// ---------------------------------------------------------------------------
// Road network enhanced labeling

enum class RnelDecision : int { Normal = 0, Anomalous = 1, NotDetermined = 2 };

// Deterministic label rules from segment degrees and the previous label:
//   (1) out(prev)=1 and in(cur)=1           -> previous label
//   (2) out(prev)=1 and in(cur)>1, prev=0   -> 0
//   (3) out(prev)>1 and in(cur)=1, prev=1   -> 1
// Everything else is left to the policy.
RnelDecision rnel_decide(const RoadNetwork& net, SegIdx prev, SegIdx cur,
                         int prev_label);

// ---------------------------------------------------------------------------
// Delayed labeling

// Streaming post-processor that merges anomalous runs separated by short
// normal gaps. After a 1->0 boundary at position b it holds the zeros back
// until either a 1 appears at some j <= b+D (the gap is rewritten to 1 and
// the run continues from j) or the window passes, at which point the run
// is complete. Only 0s inside the window ever change, only to 1, and every
// label is finalized at most D+1 points after it arrived.
class DelayedRunMerger {
 public:
  explicit DelayedRunMerger(std::size_t delay) : delay_(delay) {}

  struct Output {
    std::vector<std::pair<std::size_t, int>> finalized;  // in index order
    std::vector<std::pair<std::size_t, std::size_t>> completed_runs;
  };

  Output push(int label);
  // Flushes the pending window; an open run completes as-is.
  Output finish();

  std::size_t pending_size() const { return pending_.size(); }

 private:
  std::size_t delay_;
  std::size_t next_index_ = 0;
  std::optional<std::pair<std::size_t, std::size_t>> open_run_;
  std::deque<std::size_t> pending_;  // gap zeros awaiting the window
};

// ---------------------------------------------------------------------------
// Events and sessions

enum class EventKind { Anomaly, Normal, Warning };

struct DetectionEvent {
  EventKind kind = EventKind::Normal;
  std::string traj_id;
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;  // inclusive
  std::vector<std::string> segments;
  std::string message;  // warnings only
};

struct SessionConfig {
  std::size_t delay = 8;  // D
  Mode mode = Mode::Greedy;
  std::uint64_t seed = 0;  // sampling substream for sample mode
};

// One ongoing trajectory. The session captures immutable snapshots of the
// network, statistics and model at open and owns all mutable state (LSTM
// state, previous label, delay window), so any number of sessions can run
// concurrently against shared read-only inputs.
class DetectionSession {
 public:
  DetectionSession(const RoadNetwork& net, const StatsStore& store,
                   const RsrParams& rsr, const PolicyParams& pol,
                   std::string traj_id, SdPair sd, std::int64_t start_time,
                   const SessionConfig& cfg);
  ~DetectionSession();
  DetectionSession(DetectionSession&&) noexcept;
  DetectionSession& operator=(DetectionSession&&) noexcept;

  // Feeds the next segment; returns any events that became final.
  std::vector<DetectionEvent> push_point(SegIdx seg, bool is_last);

  bool finished() const { return finished_; }
  bool cold_start() const { return cold_start_; }
  std::size_t points_seen() const { return seen_.size(); }
  const std::vector<std::uint8_t>& pre_delay_labels() const { return pre_delay_; }
  // Populated once the trajectory completes.
  const std::vector<std::uint8_t>& final_labels() const { return final_; }

 private:
  DetectionEvent make_anomaly(std::size_t start, std::size_t end) const;

  const RoadNetwork* net_;
  std::string traj_id_;
  Rng rng_;
  // the same per-point labeling core the training rollouts use
  std::unique_ptr<detail::OnlineLabeler> labeler_;
  DelayedRunMerger merger_;
  std::vector<SegIdx> seen_;
  std::vector<std::uint8_t> pre_delay_;
  std::vector<std::uint8_t> final_;
  bool anomaly_emitted_ = false;
  bool cold_start_ = false;
  bool warned_ = false;
  bool finished_ = false;
};

struct DetectionResult {
  std::vector<std::uint8_t> labels;  // final, post-delay
  std::vector<std::uint8_t> pre_delay_labels;
  std::vector<DetectionEvent> events;
  bool cold_start = false;
};

// Runs a full trajectory through a fresh session; equivalent to feeding
// push_point one segment at a time. Per-point work is O(1) in n.
DetectionResult detect_trajectory(const RoadNetwork& net, const StatsStore& store,
                                  const RsrParams& rsr, const PolicyParams& pol,
                                  const MapMatchedTrajectory& traj,
                                  const SessionConfig& cfg);

// Ablation baseline: noisy labels from transition fractions plus plain
// maximal-run extraction (no delay, no model).
DetectionResult detect_frequency_baseline(const StatsStore& store,
                                          const RoadNetwork& net,
                                          const MapMatchedTrajectory& traj);

}  // namespace oasd

#endif  // OASD_DETECTOR_HPP
