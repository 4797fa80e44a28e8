#include "oasd/detector.hpp"

#include <fmt/format.h>

#include "labeler.hpp"
#include "oasd/error.hpp"

namespace oasd {

RnelDecision rnel_decide(const RoadNetwork& net, SegIdx prev, SegIdx cur,
                         int prev_label) {
  if (!net.is_adjacent(prev, cur)) {
    throw contract_error(fmt::format("rnel_decide: segments '{}' and '{}' not adjacent",
                                     net.segment_name(prev), net.segment_name(cur)));
  }
  const std::size_t out = net.out_degree(prev);
  const std::size_t in = net.in_degree(cur);
  if (out == 1 && in == 1) {
    return prev_label == 0 ? RnelDecision::Normal : RnelDecision::Anomalous;
  }
  if (out == 1 && in > 1 && prev_label == 0) return RnelDecision::Normal;
  if (out > 1 && in == 1 && prev_label == 1) return RnelDecision::Anomalous;
  return RnelDecision::NotDetermined;
}

// ---------------------------------------------------------------------------
// DelayedRunMerger

DelayedRunMerger::Output DelayedRunMerger::push(int label) {
  Output out;
  const std::size_t i = next_index_++;

  if (label != 0) {
    if (open_run_) {
      // any held gap zeros sit between the run end and this 1
      for (std::size_t q : pending_) out.finalized.emplace_back(q, 1);
      pending_.clear();
      open_run_->second = i;
    } else {
      open_run_ = {i, i};
    }
    out.finalized.emplace_back(i, 1);
    return out;
  }

  if (!open_run_) {
    out.finalized.emplace_back(i, 0);
    return out;
  }

  // gap zero after an open run; rewritable while its position is still
  // strictly inside the window (end, end+D]
  const std::size_t gap = pending_.size() + 1;
  if (gap < delay_) {
    pending_.push_back(i);
    return out;
  }
  // window exhausted: the run completes and the zeros are final
  out.completed_runs.push_back(*open_run_);
  open_run_.reset();
  for (std::size_t q : pending_) out.finalized.emplace_back(q, 0);
  pending_.clear();
  out.finalized.emplace_back(i, 0);
  return out;
}

DelayedRunMerger::Output DelayedRunMerger::finish() {
  Output out;
  if (open_run_) {
    out.completed_runs.push_back(*open_run_);
    open_run_.reset();
  }
  for (std::size_t q : pending_) out.finalized.emplace_back(q, 0);
  pending_.clear();
  return out;
}

// ---------------------------------------------------------------------------
// DetectionSession

DetectionSession::DetectionSession(const RoadNetwork& net, const StatsStore& store,
                                   const RsrParams& rsr, const PolicyParams& pol,
                                   std::string traj_id, SdPair sd,
                                   std::int64_t start_time, const SessionConfig& cfg)
    : net_(&net),
      traj_id_(std::move(traj_id)),
      rng_(cfg.seed),
      merger_(cfg.delay) {
  const GroupKey key{sd, time_slot(start_time, store.slots_per_day(), store.utc_offset())};
  const GroupStats* group = store.find(key);
  cold_start_ = group == nullptr;
  labeler_ = std::make_unique<detail::OnlineLabeler>(net, rsr, pol, group, cfg.mode,
                                                     &rng_);
}

DetectionSession::~DetectionSession() = default;
DetectionSession::DetectionSession(DetectionSession&&) noexcept = default;
DetectionSession& DetectionSession::operator=(DetectionSession&&) noexcept = default;

DetectionEvent DetectionSession::make_anomaly(std::size_t start, std::size_t end) const {
  DetectionEvent ev;
  ev.kind = EventKind::Anomaly;
  ev.traj_id = traj_id_;
  ev.start_idx = start;
  ev.end_idx = end;
  for (std::size_t i = start; i <= end; ++i) {
    ev.segments.push_back(net_->segment_name(seen_[i]));
  }
  return ev;
}

std::vector<DetectionEvent> DetectionSession::push_point(SegIdx seg, bool is_last) {
  if (finished_) throw stream_error("push_point on a completed session");
  if (!seen_.empty() && !net_->is_adjacent(seen_.back(), seg)) {
    throw stream_error(fmt::format("segment '{}' does not follow '{}'",
                                   net_->segment_name(seg),
                                   net_->segment_name(seen_.back())));
  }

  std::vector<DetectionEvent> events;
  if (seen_.empty() && cold_start_ && !warned_) {
    warned_ = true;
    DetectionEvent ev;
    ev.kind = EventKind::Warning;
    ev.traj_id = traj_id_;
    ev.message = "no history for this SD pair and time slot; using cold-start fallback";
    events.push_back(std::move(ev));
  }

  const int label = labeler_->push(seg, is_last).label;
  seen_.push_back(seg);
  pre_delay_.push_back(static_cast<std::uint8_t>(label));

  auto apply = [&](const DelayedRunMerger::Output& out) {
    for (auto [idx, lab] : out.finalized) {
      (void)idx;  // finalized arrives in index order
      final_.push_back(static_cast<std::uint8_t>(lab));
    }
    for (auto [start, end] : out.completed_runs) {
      events.push_back(make_anomaly(start, end));
      anomaly_emitted_ = true;
    }
  };

  apply(merger_.push(label));
  if (is_last) {
    apply(merger_.finish());
    finished_ = true;
    if (!anomaly_emitted_) {
      DetectionEvent ev;
      ev.kind = EventKind::Normal;
      ev.traj_id = traj_id_;
      events.push_back(std::move(ev));
    }
  }
  return events;
}

// ---------------------------------------------------------------------------
// Whole-trajectory drivers

DetectionResult detect_trajectory(const RoadNetwork& net, const StatsStore& store,
                                  const RsrParams& rsr, const PolicyParams& pol,
                                  const MapMatchedTrajectory& traj,
                                  const SessionConfig& cfg) {
  if (traj.length() < 2) {
    throw contract_error(fmt::format("trajectory '{}' is too short", traj.id));
  }
  DetectionSession session(net, store, rsr, pol, traj.id, traj.sd(), traj.start_time,
                           cfg);
  DetectionResult result;
  const std::size_t n = traj.length();
  for (std::size_t i = 0; i < n; ++i) {
    auto events = session.push_point(traj.segments[i], i == n - 1);
    for (auto& ev : events) result.events.push_back(std::move(ev));
  }
  result.labels = session.final_labels();
  result.pre_delay_labels = session.pre_delay_labels();
  result.cold_start = session.cold_start();
  return result;
}

DetectionResult detect_frequency_baseline(const StatsStore& store,
                                          const RoadNetwork& net,
                                          const MapMatchedTrajectory& traj) {
  DetectionResult result;
  result.labels = store.noisy_labels(traj);
  result.pre_delay_labels = result.labels;

  DelayedRunMerger merger(0);
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::uint8_t l : result.labels) {
    auto out = merger.push(l);
    for (auto r : out.completed_runs) runs.push_back(r);
  }
  for (auto r : merger.finish().completed_runs) runs.push_back(r);

  for (auto [start, end] : runs) {
    DetectionEvent ev;
    ev.kind = EventKind::Anomaly;
    ev.traj_id = traj.id;
    ev.start_idx = start;
    ev.end_idx = end;
    for (std::size_t i = start; i <= end; ++i) {
      ev.segments.push_back(net.segment_name(traj.segments[i]));
    }
    result.events.push_back(std::move(ev));
  }
  if (runs.empty()) {
    DetectionEvent ev;
    ev.kind = EventKind::Normal;
    ev.traj_id = traj.id;
    result.events.push_back(std::move(ev));
  }
  return result;
}

}  // namespace oasd
