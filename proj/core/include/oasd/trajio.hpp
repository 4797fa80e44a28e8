#ifndef OASD_TRAJIO_HPP
#define OASD_TRAJIO_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oasd/roadnet.hpp"

namespace oasd {

// (source segment, destination segment) of a trip; groups history.
struct SdPair {
  SegIdx source = 0;
  SegIdx destination = 0;

  auto operator<=>(const SdPair&) const = default;
};

// Map-matched trajectory: adjacent segments plus the trip start time.
// gt_labels, when present, are evaluation-only ground truth with the
// endpoints normal by definition.
struct MapMatchedTrajectory {
  std::string id;
  std::int64_t start_time = 0;
  std::vector<SegIdx> segments;
  std::optional<std::vector<std::uint8_t>> gt_labels;

  std::size_t length() const { return segments.size(); }
  SdPair sd() const { return {segments.front(), segments.back()}; }
};

struct RejectedRecord {
  std::size_t line = 0;
  std::string id;
  std::string reason;
};

struct TrajectoryLoad {
  std::vector<MapMatchedTrajectory> trajectories;
  std::vector<RejectedRecord> rejected;
};

// Trajectory JSONL: {"id","start","segments":[...], "labels":[0|1] optional}
// per line. Invalid records are rejected with a reason; strict mode turns
// the first rejection into a validation error.
TrajectoryLoad load_trajectories(std::istream& in, const RoadNetwork& net,
                                 bool strict = false);
TrajectoryLoad load_trajectories_file(const std::string& path, const RoadNetwork& net,
                                      bool strict = false);

void save_trajectories(std::ostream& out, const RoadNetwork& net,
                       const std::vector<MapMatchedTrajectory>& trajs);
void save_trajectories_file(const std::string& path, const RoadNetwork& net,
                            const std::vector<MapMatchedTrajectory>& trajs);

// Slot of the trip start within its UTC day; slots_per_day must divide 24.
// utc_offset_seconds shifts the day boundary for local-time emulation.
int time_slot(std::int64_t epoch_seconds, int slots_per_day,
              std::int64_t utc_offset_seconds = 0);

// Ordered lazy iteration over (index, segment); single consumer. Models
// the online arrival of points: nothing is produced until next() is
// called, and aborting early leaves the rest unproduced.
class TrajectoryStream {
 public:
  explicit TrajectoryStream(const MapMatchedTrajectory& traj) : traj_(&traj) {}

  std::optional<std::pair<std::size_t, SegIdx>> next();
  bool exhausted() const { return pos_ >= traj_->segments.size(); }

 private:
  const MapMatchedTrajectory* traj_;
  std::size_t pos_ = 0;
};

}  // namespace oasd

#endif  // OASD_TRAJIO_HPP
