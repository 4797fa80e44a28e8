#include <limits>
#include <set>
#include <sstream>

#include <doctest.h>

#include "oasd/groupstats.hpp"
#include "oasd/synthgen.hpp"
#include "oasd/trajio.hpp"
#include "test_support.hpp"

using namespace oasd;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.grid_width = 12;
  cfg.grid_height = 12;
  cfg.sd_pairs = 5;
  cfg.trajs_per_pair = 30;
  cfg.min_sd_dist = 7;
  cfg.max_sd_dist = 9;
  cfg.detour_min = 2;
  cfg.detour_max = 4;
  cfg.anomaly_ratio = 0.1;
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST_CASE("anomaly ratio zero produces an all-normal corpus") {
  SynthConfig cfg = small_config();
  cfg.anomaly_ratio = 0.0;
  auto world = generate(cfg);
  CHECK(world.trajectories.size() == cfg.sd_pairs * cfg.trajs_per_pair);
  for (const auto& t : world.trajectories) {
    REQUIRE(t.gt_labels.has_value());
    for (std::uint8_t l : *t.gt_labels) CHECK(l == 0);
  }
}

TEST_CASE("fixed seed reproduces byte-identical files") {
  SynthConfig cfg = small_config();
  auto a = generate(cfg);
  auto b = generate(cfg);

  std::ostringstream net_a, net_b, trajs_a, trajs_b;
  a.net.save(net_a);
  b.net.save(net_b);
  save_trajectories(trajs_a, a.net, a.trajectories);
  save_trajectories(trajs_b, b.net, b.trajectories);
  CHECK(net_a.str() == net_b.str());
  CHECK(trajs_a.str() == trajs_b.str());
  CHECK(a.manifest_json == b.manifest_json);

  cfg.seed = 10;
  auto c = generate(cfg);
  std::ostringstream trajs_c;
  save_trajectories(trajs_c, c.net, c.trajectories);
  CHECK(trajs_a.str() != trajs_c.str());
}

TEST_CASE("every generated trajectory passes ingestion validation") {
  auto world = generate(small_config());
  std::ostringstream out;
  save_trajectories(out, world.net, world.trajectories);
  std::istringstream in(out.str());
  auto load = load_trajectories(in, world.net, /*strict=*/true);
  CHECK(load.trajectories.size() == world.trajectories.size());
  for (const auto& t : load.trajectories) {
    CHECK(t.length() >= 2);
    REQUIRE(t.gt_labels.has_value());
    CHECK(t.gt_labels->front() == 0);
    CHECK(t.gt_labels->back() == 0);
  }
}

TEST_CASE("ground truth is consistent with the group statistics") {
  SynthConfig cfg = small_config();
  auto world = generate(cfg);
  StatsStore store = build_stats(world.trajectories, cfg.slots_per_day, 0.5, 0.4);

  std::size_t anomalous_trajs = 0;
  for (const auto& t : world.trajectories) {
    const auto& gt = *t.gt_labels;
    bool any = false;
    const GroupStats& g = store.require(store.key_for(t));
    for (std::size_t i = 1; i + 1 < t.length(); ++i) {
      if (gt[i] == 0) continue;
      any = true;
      // a ground-truth anomalous position's incoming transition never
      // occurs in any of its group's normal routes
      CHECK(!g.normal_transitions.contains({t.segments[i - 1], t.segments[i]}));
    }
    anomalous_trajs += any ? 1 : 0;
  }
  const double ratio = static_cast<double>(anomalous_trajs) /
                       static_cast<double>(world.trajectories.size());
  CHECK(ratio == doctest::Approx(cfg.anomaly_ratio).epsilon(0.3));
}

TEST_CASE("fractions line up with the configured weights") {
  SynthConfig cfg = small_config();
  cfg.anomaly_ratio = 0.02;
  cfg.trajs_per_pair = 50;
  cfg.route_count_weights = {0.0, 1.0, 0.0};  // always two routes
  auto world = generate(cfg);
  StatsStore store = build_stats(world.trajectories, cfg.slots_per_day, 0.5, 0.4);

  // detour transitions stay rare; dominant-route transitions stay frequent
  for (const auto& t : world.trajectories) {
    const auto& gt = *t.gt_labels;
    const auto fractions = store.fraction_sequence(t);
    for (std::size_t i = 1; i + 1 < t.length(); ++i) {
      if (gt[i] == 1) {
        CHECK(fractions[i] <= cfg.anomaly_ratio + 0.05);
      }
    }
  }

  // every intended normal route clears its configured weight minus slack
  for (const auto& [key, group] : store.groups()) {
    double best = 0.0;
    for (const auto& [route, count] : group.route_counts) {
      best = std::max(best,
                      static_cast<double>(count) / static_cast<double>(group.traj_count));
    }
    CHECK(best >= 0.55 - 0.05);
  }
}

TEST_CASE("corridor option inserts degree-one chains") {
  SynthConfig cfg = small_config();
  cfg.corridor_edges = 10;
  cfg.corridor_length = 3;
  auto world = generate(cfg);

  std::size_t chain_segments = 0;
  for (SegIdx e = 0; e < world.net.segment_count(); ++e) {
    if (world.net.out_degree(e) == 1 && world.net.in_degree(e) == 1) ++chain_segments;
  }
  CHECK(chain_segments > 0);
}

TEST_CASE("drift scenario swaps roles between partitions") {
  SynthConfig cfg = small_config();
  cfg.sd_pairs = 3;
  cfg.trajs_per_pair = 20;
  auto drift = drift_scenario(cfg);

  CHECK(drift.part1.size() == cfg.sd_pairs * cfg.trajs_per_pair);
  CHECK(drift.part2.size() == drift.part1.size());

  // partition 2 starts strictly later than everything in partition 1
  std::int64_t max1 = 0, min2 = std::numeric_limits<std::int64_t>::max();
  for (const auto& t : drift.part1) max1 = std::max(max1, t.start_time);
  for (const auto& t : drift.part2) min2 = std::min(min2, t.start_time);
  CHECK(max1 < min2);

  auto count_anomalous = [](const std::vector<MapMatchedTrajectory>& part) {
    std::size_t n = 0;
    for (const auto& t : part) {
      bool any = false;
      for (std::uint8_t l : *t.gt_labels) any = any || l == 1;
      n += any ? 1 : 0;
    }
    return n;
  };
  // per pair: 10% swapped-route anomalies plus anomaly_ratio detours
  CHECK(count_anomalous(drift.part1) == 3 * (2 + 2));
  CHECK(count_anomalous(drift.part2) == 3 * (2 + 2));

  // every dominant route of part 1 reappears among part 2's anomalies
  std::set<Route> normal1, anomalous2;
  for (const auto& t : drift.part1) {
    bool any = false;
    for (std::uint8_t l : *t.gt_labels) any = any || l == 1;
    if (!any) normal1.insert(t.segments);
  }
  for (const auto& t : drift.part2) {
    bool any = false;
    for (std::uint8_t l : *t.gt_labels) any = any || l == 1;
    if (any) anomalous2.insert(t.segments);
  }
  for (const auto& r : normal1) CHECK(anomalous2.contains(r));

  for (const auto& t : drift.part1) {
    CHECK(t.gt_labels->front() == 0);
    CHECK(t.gt_labels->back() == 0);
  }

  // identical configuration and seed reproduce the scenario
  auto again = drift_scenario(cfg);
  std::ostringstream p1a, p1b;
  save_trajectories(p1a, drift.net, drift.part1);
  save_trajectories(p1b, again.net, again.part1);
  CHECK(p1a.str() == p1b.str());
}

TEST_CASE("multiple start slots split the groups") {
  SynthConfig cfg = small_config();
  cfg.slots_used = {9, 15};
  auto world = generate(cfg);
  StatsStore store = build_stats(world.trajectories, cfg.slots_per_day, 0.5, 0.4);

  std::set<int> slots;
  for (const auto& [key, group] : store.groups()) slots.insert(key.slot);
  CHECK(slots == std::set<int>{9, 15});
  // one group per (pair, slot)
  CHECK(store.group_count() == cfg.sd_pairs * 2);
}
