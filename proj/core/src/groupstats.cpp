#include "oasd/groupstats.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "oasd/error.hpp"
#include "oasd/rng.hpp"

namespace oasd {

using nlohmann::json;

namespace {

void index_route(GroupStats& g, const Route& route, std::size_t count) {
  g.traj_count += count;
  g.route_counts[route] += count;
  // each trajectory contributes at most once per distinct transition
  std::set<Transition> seen;
  for (std::size_t i = 1; i < route.size(); ++i) {
    seen.insert({route[i - 1], route[i]});
  }
  for (const Transition& t : seen) g.transition_counts[t] += count;
}

void rebuild_normal_transitions(GroupStats& g, double delta) {
  g.normal_transitions.clear();
  const double total = static_cast<double>(g.traj_count);
  for (const auto& [route, count] : g.route_counts) {
    if (static_cast<double>(count) / total > delta) {
      for (std::size_t i = 1; i < route.size(); ++i) {
        g.normal_transitions.insert({route[i - 1], route[i]});
      }
    }
  }
}

}  // namespace

GroupKey StatsStore::key_for(const MapMatchedTrajectory& traj) const {
  return {traj.sd(), time_slot(traj.start_time, slots_per_day_, utc_offset_)};
}

const GroupStats* StatsStore::find(const GroupKey& key) const {
  auto it = groups_.find(key);
  return it == groups_.end() ? nullptr : &it->second;
}

const GroupStats& StatsStore::require(const GroupKey& key) const {
  const GroupStats* g = find(key);
  if (g == nullptr) {
    throw not_found_error(fmt::format("no history for group (source={}, dest={}, slot={})",
                                      key.sd.source, key.sd.destination, key.slot));
  }
  return *g;
}

double StatsStore::transition_fraction(const GroupKey& key, std::optional<SegIdx> prev,
                                       SegIdx cur, bool is_terminal) const {
  const GroupStats& g = require(key);
  if (!prev.has_value() || is_terminal) return 1.0;
  auto it = g.transition_counts.find({*prev, cur});
  if (it == g.transition_counts.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(g.traj_count);
}

std::vector<double> StatsStore::fraction_sequence(const MapMatchedTrajectory& traj) const {
  const GroupKey key = key_for(traj);
  require(key);
  const std::size_t n = traj.length();
  std::vector<double> fractions(n);
  fractions[0] = transition_fraction(key, std::nullopt, traj.segments[0], false);
  for (std::size_t i = 1; i < n; ++i) {
    fractions[i] =
        transition_fraction(key, traj.segments[i - 1], traj.segments[i], i == n - 1);
  }
  return fractions;
}

std::vector<std::uint8_t> StatsStore::noisy_labels(const MapMatchedTrajectory& traj) const {
  const std::vector<double> fractions = fraction_sequence(traj);
  std::vector<std::uint8_t> labels(fractions.size());
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    labels[i] = fractions[i] > alpha_ ? 0 : 1;
  }
  labels.front() = 0;
  labels.back() = 0;
  return labels;
}

std::vector<Route> StatsStore::normal_routes(const GroupKey& key) const {
  const GroupStats& g = require(key);
  std::vector<Route> routes;
  const double total = static_cast<double>(g.traj_count);
  for (const auto& [route, count] : g.route_counts) {
    if (static_cast<double>(count) / total > delta_) routes.push_back(route);
  }
  return routes;
}

std::vector<std::uint8_t> StatsStore::nrf(const MapMatchedTrajectory& traj) const {
  const GroupStats& g = require(key_for(traj));
  const std::size_t n = traj.length();
  std::vector<std::uint8_t> features(n, 0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    Transition t{traj.segments[i - 1], traj.segments[i]};
    features[i] = g.normal_transitions.contains(t) ? 0 : 1;
  }
  return features;
}

StatsStore build_stats(const std::vector<MapMatchedTrajectory>& trajectories,
                       int slots_per_day, double alpha, double delta,
                       std::int64_t utc_offset) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw config_error(fmt::format("alpha must be in [0,1], got {}", alpha));
  }
  if (delta < 0.0 || delta > 1.0) {
    throw config_error(fmt::format("delta must be in [0,1], got {}", delta));
  }
  StatsStore store;
  store.slots_per_day_ = slots_per_day;
  store.alpha_ = alpha;
  store.delta_ = delta;
  store.utc_offset_ = utc_offset;
  // validates slots_per_day even on empty input
  time_slot(0, slots_per_day, utc_offset);

  for (const MapMatchedTrajectory& traj : trajectories) {
    GroupKey key{traj.sd(), time_slot(traj.start_time, slots_per_day, utc_offset)};
    index_route(store.groups_[key], traj.segments, 1);
  }
  for (auto& [key, group] : store.groups_) rebuild_normal_transitions(group, delta);
  return store;
}

StatsStore drop_history(const StatsStore& store, double drop_rate, std::uint64_t seed) {
  if (drop_rate < 0.0 || drop_rate > 1.0) {
    throw config_error(fmt::format("drop_rate must be in [0,1], got {}", drop_rate));
  }
  StatsStore out;
  out.slots_per_day_ = store.slots_per_day_;
  out.alpha_ = store.alpha_;
  out.delta_ = store.delta_;
  out.utc_offset_ = store.utc_offset_;

  std::size_t group_idx = 0;
  for (const auto& [key, group] : store.groups_) {
    Rng rng = Rng::substream(seed, fmt::format("drop/{}", group_idx++));
    // expand the route multiset in deterministic (map) order
    std::vector<const Route*> members;
    members.reserve(group.traj_count);
    for (const auto& [route, count] : group.route_counts) {
      for (std::size_t i = 0; i < count; ++i) members.push_back(&route);
    }
    rng.shuffle(members);
    // floor of rate*count, snapping exact products that land a hair low
    const std::size_t to_drop = static_cast<std::size_t>(
        drop_rate * static_cast<double>(group.traj_count) + 1e-9);
    if (to_drop >= members.size()) continue;

    GroupStats kept;
    for (std::size_t i = to_drop; i < members.size(); ++i) {
      index_route(kept, *members[i], 1);
    }
    rebuild_normal_transitions(kept, out.delta_);
    out.groups_.emplace(key, std::move(kept));
  }
  return out;
}

void StatsStore::save(std::ostream& out, const RoadNetwork& net) const {
  json doc;
  doc["version"] = 1;
  doc["slots_per_day"] = slots_per_day_;
  doc["alpha"] = alpha_;
  doc["delta"] = delta_;
  doc["utc_offset"] = utc_offset_;
  json groups = json::array();
  for (const auto& [key, group] : groups_) {
    json g;
    g["source"] = net.segment_name(key.sd.source);
    g["dest"] = net.segment_name(key.sd.destination);
    g["slot"] = key.slot;
    json routes = json::array();
    for (const auto& [route, count] : group.route_counts) {
      json names = json::array();
      for (SegIdx s : route) names.push_back(net.segment_name(s));
      routes.push_back({{"route", std::move(names)}, {"count", count}});
    }
    g["routes"] = std::move(routes);
    groups.push_back(std::move(g));
  }
  doc["groups"] = std::move(groups);
  out << doc.dump(2) << "\n";
}

void StatsStore::save_file(const std::string& path, const RoadNetwork& net) const {
  std::ofstream out(path);
  if (!out) throw io_error(fmt::format("cannot write stats file '{}'", path));
  save(out, net);
}

StatsStore load_stats(std::istream& in, const RoadNetwork& net) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw parse_error(fmt::format("stats file: {}", e.what()));
  }
  if (doc.value("version", 0) != 1) {
    throw validation_error("unsupported stats checkpoint version");
  }
  StatsStore store;
  store.slots_per_day_ = doc.at("slots_per_day").get<int>();
  store.alpha_ = doc.at("alpha").get<double>();
  store.delta_ = doc.at("delta").get<double>();
  store.utc_offset_ = doc.value("utc_offset", static_cast<std::int64_t>(0));

  for (const auto& g : doc.at("groups")) {
    GroupKey key;
    key.sd.source = net.require_segment(g.at("source").get<std::string>());
    key.sd.destination = net.require_segment(g.at("dest").get<std::string>());
    key.slot = g.at("slot").get<int>();
    GroupStats group;
    for (const auto& r : g.at("routes")) {
      Route route;
      for (const auto& s : r.at("route")) {
        route.push_back(net.require_segment(s.get<std::string>()));
      }
      index_route(group, route, r.at("count").get<std::size_t>());
    }
    rebuild_normal_transitions(group, store.delta_);
    store.groups_.emplace(key, std::move(group));
  }
  return store;
}

StatsStore load_stats_file(const std::string& path, const RoadNetwork& net) {
  std::ifstream in(path);
  if (!in) throw io_error(fmt::format("cannot open stats file '{}'", path));
  return load_stats(in, net);
}

}  // namespace oasd
