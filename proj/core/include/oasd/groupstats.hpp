#ifndef OASD_GROUPSTATS_HPP
#define OASD_GROUPSTATS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oasd/trajio.hpp"

namespace oasd {

// History is grouped by (SD pair, time slot of the trip start).
struct GroupKey {
  SdPair sd;
  int slot = 0;

  auto operator<=>(const GroupKey&) const = default;
};

using Route = std::vector<SegIdx>;
using Transition = std::pair<SegIdx, SegIdx>;

// Per-group history. transition_counts[(p,c)] is the number of member
// trajectories containing the transition <p,c> at least once (a loop
// traversing it twice still counts one). route_counts keys full segment
// sequences; their values sum to traj_count.
struct GroupStats {
  std::size_t traj_count = 0;
  std::map<Transition, std::size_t> transition_counts;
  std::map<Route, std::size_t> route_counts;
  // Transitions occurring in some route whose fraction exceeds delta;
  // rebuilt whenever the store is built.
  std::set<Transition> normal_transitions;
};

// Immutable store of per-group statistics plus the two preprocessing
// thresholds: alpha for noisy labels, delta for normal-route inference.
class StatsStore {
 public:
  StatsStore() = default;

  int slots_per_day() const { return slots_per_day_; }
  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  std::int64_t utc_offset() const { return utc_offset_; }
  std::size_t group_count() const { return groups_.size(); }
  const std::map<GroupKey, GroupStats>& groups() const { return groups_; }

  GroupKey key_for(const MapMatchedTrajectory& traj) const;
  const GroupStats* find(const GroupKey& key) const;
  // Throws a not-found error; callers choose the cold-start policy.
  const GroupStats& require(const GroupKey& key) const;

  // 1.0 for the padded source transition and for the terminal position;
  // otherwise the fraction of group trajectories containing <prev,cur>.
  double transition_fraction(const GroupKey& key, std::optional<SegIdx> prev,
                             SegIdx cur, bool is_terminal) const;

  // Per-position fractions for a trajectory, endpoints forced 1.0.
  std::vector<double> fraction_sequence(const MapMatchedTrajectory& traj) const;

  // 0 where the fraction strictly exceeds alpha, 1 otherwise; endpoints 0.
  std::vector<std::uint8_t> noisy_labels(const MapMatchedTrajectory& traj) const;

  // Routes whose trajectory fraction strictly exceeds delta.
  std::vector<Route> normal_routes(const GroupKey& key) const;

  // Normal route feature: 0 iff the incoming transition occurs in some
  // inferred normal route; endpoints 0.
  std::vector<std::uint8_t> nrf(const MapMatchedTrajectory& traj) const;

  friend StatsStore build_stats(const std::vector<MapMatchedTrajectory>&, int, double,
                                double, std::int64_t);
  friend StatsStore drop_history(const StatsStore&, double, std::uint64_t);
  friend StatsStore load_stats(std::istream&, const RoadNetwork&);

  void save(std::ostream& out, const RoadNetwork& net) const;
  void save_file(const std::string& path, const RoadNetwork& net) const;

 private:
  std::map<GroupKey, GroupStats> groups_;
  int slots_per_day_ = 24;
  double alpha_ = 0.5;
  double delta_ = 0.4;
  std::int64_t utc_offset_ = 0;
};

StatsStore build_stats(const std::vector<MapMatchedTrajectory>& trajectories,
                       int slots_per_day, double alpha = 0.5, double delta = 0.4,
                       std::int64_t utc_offset = 0);

// Rebuilds the store after removing floor(drop_rate * traj_count)
// trajectories per group uniformly at random; seeded and reproducible.
// Groups left empty disappear.
StatsStore drop_history(const StatsStore& store, double drop_rate, std::uint64_t seed);

// Versioned JSON checkpoint keyed by route counts; transition counts and
// normal transitions are rebuilt on load.
StatsStore load_stats(std::istream& in, const RoadNetwork& net);
StatsStore load_stats_file(const std::string& path, const RoadNetwork& net);

}  // namespace oasd

#endif  // OASD_GROUPSTATS_HPP
