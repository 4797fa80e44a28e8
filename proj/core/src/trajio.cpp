#include "oasd/trajio.hpp"

#include <fstream>
#include <iostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "oasd/error.hpp"

namespace oasd {

using nlohmann::json;

namespace {

// Returns an empty string on success, otherwise the rejection reason.
std::string parse_record(const json& rec, const RoadNetwork& net,
                         MapMatchedTrajectory& out) {
  if (!rec.contains("id") || !rec.contains("start") || !rec.contains("segments")) {
    return "missing required field (id, start, segments)";
  }
  out.id = rec.at("id").get<std::string>();
  out.start_time = rec.at("start").get<std::int64_t>();

  const auto& segs = rec.at("segments");
  if (!segs.is_array() || segs.size() < 2) return "too short (need at least 2 segments)";

  out.segments.clear();
  out.segments.reserve(segs.size());
  for (const auto& s : segs) {
    auto idx = net.find_segment(s.get<std::string>());
    if (!idx) return fmt::format("unknown segment id '{}'", s.get<std::string>());
    out.segments.push_back(*idx);
  }
  for (std::size_t i = 1; i < out.segments.size(); ++i) {
    if (!net.is_adjacent(out.segments[i - 1], out.segments[i])) {
      return fmt::format("segments '{}' and '{}' are not adjacent",
                         net.segment_name(out.segments[i - 1]),
                         net.segment_name(out.segments[i]));
    }
  }

  out.gt_labels.reset();
  if (rec.contains("labels")) {
    std::vector<std::uint8_t> labels;
    for (const auto& l : rec.at("labels")) {
      int v = l.get<int>();
      if (v != 0 && v != 1) return "labels must be 0 or 1";
      labels.push_back(static_cast<std::uint8_t>(v));
    }
    if (labels.size() != out.segments.size()) {
      return "labels length does not match segments length";
    }
    if (labels.front() != 0 || labels.back() != 0) {
      return "source and destination labels must be 0";
    }
    out.gt_labels = std::move(labels);
  }
  return {};
}

}  // namespace

TrajectoryLoad load_trajectories(std::istream& in, const RoadNetwork& net, bool strict) {
  TrajectoryLoad result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;

    json rec;
    std::string reason;
    MapMatchedTrajectory traj;
    try {
      rec = json::parse(line);
      reason = parse_record(rec, net, traj);
    } catch (const json::exception& e) {
      reason = e.what();
    }

    if (reason.empty()) {
      result.trajectories.push_back(std::move(traj));
    } else {
      if (strict) {
        throw validation_error(
            fmt::format("trajectory record at line {}: {}", line_no, reason));
      }
      std::string id = rec.is_object() ? rec.value("id", std::string{}) : std::string{};
      result.rejected.push_back({line_no, std::move(id), std::move(reason)});
    }
  }
  return result;
}

TrajectoryLoad load_trajectories_file(const std::string& path, const RoadNetwork& net,
                                      bool strict) {
  std::ifstream in(path);
  if (!in) throw io_error(fmt::format("cannot open trajectory file '{}'", path));
  return load_trajectories(in, net, strict);
}

void save_trajectories(std::ostream& out, const RoadNetwork& net,
                       const std::vector<MapMatchedTrajectory>& trajs) {
  for (const MapMatchedTrajectory& t : trajs) {
    json rec;
    rec["id"] = t.id;
    rec["start"] = t.start_time;
    json segs = json::array();
    for (SegIdx s : t.segments) segs.push_back(net.segment_name(s));
    rec["segments"] = std::move(segs);
    if (t.gt_labels) {
      json labels = json::array();
      for (std::uint8_t l : *t.gt_labels) labels.push_back(static_cast<int>(l));
      rec["labels"] = std::move(labels);
    }
    out << rec.dump() << "\n";
  }
}

void save_trajectories_file(const std::string& path, const RoadNetwork& net,
                            const std::vector<MapMatchedTrajectory>& trajs) {
  std::ofstream out(path);
  if (!out) throw io_error(fmt::format("cannot write trajectory file '{}'", path));
  save_trajectories(out, net, trajs);
}

int time_slot(std::int64_t epoch_seconds, int slots_per_day,
              std::int64_t utc_offset_seconds) {
  if (slots_per_day < 1 || slots_per_day > 24 || 24 % slots_per_day != 0) {
    throw config_error(
        fmt::format("slots_per_day must be in [1,24] and divide 24, got {}", slots_per_day));
  }
  constexpr std::int64_t kDay = 86400;
  std::int64_t t = (epoch_seconds + utc_offset_seconds) % kDay;
  if (t < 0) t += kDay;
  const std::int64_t slot_len = kDay / slots_per_day;
  return static_cast<int>(t / slot_len);
}

std::optional<std::pair<std::size_t, SegIdx>> TrajectoryStream::next() {
  if (pos_ >= traj_->segments.size()) return std::nullopt;
  std::size_t i = pos_++;
  return std::make_pair(i, traj_->segments[i]);
}

}  // namespace oasd
