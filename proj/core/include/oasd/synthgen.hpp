#ifndef OASD_SYNTHGEN_HPP
#define OASD_SYNTHGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "oasd/roadnet.hpp"
#include "oasd/trajio.hpp"

namespace oasd {

// Deterministic synthetic world: a 4-connected directed grid, SD pairs
// whose routes share fixed entry and exit segments, weighted normal routes
// (monotone staircases) and detour injection with exact ground truth.
// Interior grid vertices have degree >= 2 so the non-deterministic labeling
// cases occur; corridor_edges subdivides edges into degree-1 chains to
// exercise the deterministic rules as well.
struct SynthConfig {
  std::size_t grid_width = 16;
  std::size_t grid_height = 16;
  std::size_t sd_pairs = 20;
  std::size_t trajs_per_pair = 40;

  // probability of a pair having 1, 2 or 3 normal routes
  std::vector<double> route_count_weights = {0.6, 0.4, 0.0};
  // per-route weights used for 1-, 2- and 3-route pairs
  std::vector<std::vector<double>> route_weights = {
      {1.0}, {0.55, 0.45}, {0.40, 0.32, 0.28}};

  double anomaly_ratio = 0.02;
  // bounds on the number of route segments replaced by a detour
  std::size_t detour_min = 3;
  std::size_t detour_max = 6;
  // share of anomalous trajectories that reuse the pair's recurring detour
  // route instead of drawing a fresh one; real corpora hold far fewer
  // anomalous routes than anomalous trajectories
  double recurring_share = 0.5;

  std::vector<int> slots_used = {9};
  int slots_per_day = 24;
  std::int64_t base_day = 19000;  // epoch day of all start times

  // manhattan distance between the staircase endpoints
  std::size_t min_sd_dist = 8;
  std::size_t max_sd_dist = 12;

  std::size_t corridor_edges = 0;
  std::size_t corridor_length = 3;

  std::uint64_t seed = 1;
};

struct SynthOutput {
  RoadNetwork net;
  std::vector<MapMatchedTrajectory> trajectories;
  std::string manifest_json;
};

SynthOutput generate(const SynthConfig& cfg);

// Concept-drift scenario: every pair has two interior-disjoint routes; the
// dominant route of partition 1 becomes the anomalous one of partition 2
// and vice versa. Partition 2 start times fall on the following day so a
// sort by start time separates the partitions.
struct DriftOutput {
  RoadNetwork net;
  std::vector<MapMatchedTrajectory> part1;
  std::vector<MapMatchedTrajectory> part2;
  std::string manifest_json;
};

DriftOutput drift_scenario(const SynthConfig& cfg);

}  // namespace oasd

#endif  // OASD_SYNTHGEN_HPP
