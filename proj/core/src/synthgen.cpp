#include "oasd/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "oasd/error.hpp"
#include "oasd/rng.hpp"

namespace oasd {

using nlohmann::json;

namespace {

using Coord = std::pair<std::size_t, std::size_t>;
using LogicalEdge = std::pair<std::size_t, std::size_t>;  // vertex indices

// Grid world with optional subdivided (corridor) edges. Routes are built
// over logical grid edges and expanded to segment chains afterwards.
struct GridWorld {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<RoadNetwork::Vertex> vertices;
  std::vector<RoadNetwork::Segment> segments;
  // logical directed edge -> segment chain traversing it
  std::map<LogicalEdge, std::vector<SegIdx>> chains;
  // logical adjacency between grid vertices
  std::vector<std::vector<std::size_t>> neighbors;

  std::size_t vid(std::size_t x, std::size_t y) const { return y * width + x; }
  Coord coord(std::size_t v) const { return {v % width, v / width}; }
};

GridWorld build_grid(const SynthConfig& cfg, Rng& rng) {
  GridWorld g;
  g.width = cfg.grid_width;
  g.height = cfg.grid_height;
  if (g.width < 4 || g.height < 4) {
    throw config_error("grid must be at least 4x4");
  }

  for (std::size_t y = 0; y < g.height; ++y) {
    for (std::size_t x = 0; x < g.width; ++x) {
      g.vertices.push_back({fmt::format("v{}_{}", x, y), static_cast<double>(x),
                            static_cast<double>(y)});
    }
  }

  std::vector<LogicalEdge> undirected;
  g.neighbors.assign(g.vertices.size(), {});
  for (std::size_t y = 0; y < g.height; ++y) {
    for (std::size_t x = 0; x < g.width; ++x) {
      const std::size_t v = g.vid(x, y);
      if (x + 1 < g.width) {
        undirected.push_back({v, g.vid(x + 1, y)});
        g.neighbors[v].push_back(g.vid(x + 1, y));
        g.neighbors[g.vid(x + 1, y)].push_back(v);
      }
      if (y + 1 < g.height) {
        undirected.push_back({v, g.vid(x, y + 1)});
        g.neighbors[v].push_back(g.vid(x, y + 1));
        g.neighbors[g.vid(x, y + 1)].push_back(v);
      }
    }
  }

  std::set<std::size_t> corridor_picks;
  if (cfg.corridor_edges > 0) {
    const std::size_t n = std::min(cfg.corridor_edges, undirected.size());
    while (corridor_picks.size() < n) {
      corridor_picks.insert(static_cast<std::size_t>(rng.below(undirected.size())));
    }
  }

  auto add_segment = [&](std::size_t from, std::size_t to) {
    const std::string id = fmt::format("s{}__{}", g.vertices[from].id.substr(1),
                                       g.vertices[to].id.substr(1));
    g.segments.push_back(
        {id, static_cast<VertexIdx>(from), static_cast<VertexIdx>(to), 100.0});
    return static_cast<SegIdx>(g.segments.size() - 1);
  };

  auto add_chain = [&](std::size_t from, std::size_t to, std::size_t pieces) {
    std::vector<SegIdx> chain;
    if (pieces <= 1) {
      chain.push_back(add_segment(from, to));
    } else {
      std::size_t prev = from;
      for (std::size_t k = 1; k < pieces; ++k) {
        const auto [fx, fy] = g.coord(from);
        const auto [tx, ty] = g.coord(to);
        const double t = static_cast<double>(k) / static_cast<double>(pieces);
        g.vertices.push_back({fmt::format("c{}_{}_{}_{}__{}", fx, fy, tx, ty, k),
                              fx + (static_cast<double>(tx) - fx) * t,
                              fy + (static_cast<double>(ty) - fy) * t});
        const std::size_t mid = g.vertices.size() - 1;
        chain.push_back(add_segment(prev, mid));
        prev = mid;
      }
      chain.push_back(add_segment(prev, to));
    }
    g.chains.emplace(LogicalEdge{from, to}, std::move(chain));
  };

  for (std::size_t i = 0; i < undirected.size(); ++i) {
    const std::size_t pieces =
        corridor_picks.contains(i) ? std::max<std::size_t>(cfg.corridor_length, 2) : 1;
    add_chain(undirected[i].first, undirected[i].second, pieces);
    add_chain(undirected[i].second, undirected[i].first, pieces);
  }
  return g;
}

// A route over logical edges plus its segment expansion.
struct RouteDef {
  std::vector<LogicalEdge> edges;
  std::vector<SegIdx> segments;
  // segment index range covered by each logical edge
  std::vector<std::pair<std::size_t, std::size_t>> edge_spans;
};

RouteDef expand(const GridWorld& g, const std::vector<LogicalEdge>& edges) {
  RouteDef r;
  r.edges = edges;
  for (const LogicalEdge& e : edges) {
    const auto& chain = g.chains.at(e);
    r.edge_spans.emplace_back(r.segments.size(), r.segments.size() + chain.size() - 1);
    r.segments.insert(r.segments.end(), chain.begin(), chain.end());
  }
  return r;
}

// Monotone staircase between grid vertices; both deltas must be >= 0.
std::vector<LogicalEdge> staircase(const GridWorld& g, std::size_t from, std::size_t to,
                                   Rng& rng) {
  const auto [x0, y0] = g.coord(from);
  const auto [x1, y1] = g.coord(to);
  std::vector<int> moves;  // 0 = +x, 1 = +y
  moves.insert(moves.end(), x1 - x0, 0);
  moves.insert(moves.end(), y1 - y0, 1);
  rng.shuffle(moves);

  std::vector<LogicalEdge> edges;
  std::size_t x = x0, y = y0;
  for (int m : moves) {
    const std::size_t v = g.vid(x, y);
    if (m == 0) {
      ++x;
    } else {
      ++y;
    }
    edges.push_back({v, g.vid(x, y)});
  }
  return edges;
}

// Shortest alternative path between two grid vertices avoiding a set of
// logical edges; expansion order is shuffled so distinct seeds explore
// distinct detours. Returns an empty list when no path exists.
std::vector<LogicalEdge> bfs_detour(const GridWorld& g, std::size_t from, std::size_t to,
                                    const std::set<LogicalEdge>& forbidden, Rng& rng) {
  std::vector<std::int64_t> parent(g.width * g.height, -1);
  std::queue<std::size_t> frontier;
  frontier.push(from);
  parent[from] = static_cast<std::int64_t>(from);
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    if (v == to) break;
    std::vector<std::size_t> nbrs(g.neighbors[v].begin(), g.neighbors[v].end());
    rng.shuffle(nbrs);
    for (std::size_t w : nbrs) {
      if (parent[w] != -1) continue;
      if (forbidden.contains({v, w})) continue;
      parent[w] = static_cast<std::int64_t>(v);
      frontier.push(w);
    }
  }
  if (parent[to] == -1) return {};

  std::vector<std::size_t> path;
  for (std::size_t v = to; v != from; v = static_cast<std::size_t>(parent[v])) {
    path.push_back(v);
  }
  path.push_back(from);
  std::reverse(path.begin(), path.end());

  std::vector<LogicalEdge> edges;
  for (std::size_t i = 1; i < path.size(); ++i) edges.push_back({path[i - 1], path[i]});
  return edges;
}

// Largest-remainder apportionment of n into weighted buckets.
std::vector<std::size_t> apportion(std::size_t n, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(n) * weights[i] / total;
    counts[i] = static_cast<std::size_t>(exact);
    assigned += counts[i];
    remainders.push_back({exact - std::floor(exact), i});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
    counts[remainders[k % remainders.size()].second]++;
  }
  return counts;
}

std::int64_t draw_start_time(const SynthConfig& cfg, Rng& rng, std::int64_t day) {
  const std::int64_t slot_len = 86400 / cfg.slots_per_day;
  const int slot =
      cfg.slots_used[static_cast<std::size_t>(rng.below(cfg.slots_used.size()))];
  return day * 86400 + slot * slot_len +
         static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(slot_len)));
}

struct PairDef {
  LogicalEdge entry;  // S -> S'
  LogicalEdge exit;   // D' -> D
  std::vector<RouteDef> routes;
  std::vector<double> weights;
};

// Anchored pair: all routes share the entry and exit segments and differ in
// the staircase between them.
PairDef make_pair(const GridWorld& g, const SynthConfig& cfg, Rng& rng,
                  std::size_t n_routes) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    const std::size_t dist =
        cfg.min_sd_dist + rng.below(cfg.max_sd_dist - cfg.min_sd_dist + 1);
    // split the distance into dx, dy >= 2 so multiple staircases exist
    if (dist < 4) throw config_error("min_sd_dist must be at least 4");
    const std::size_t dx = 2 + rng.below(dist - 3);
    const std::size_t dy = dist - dx;
    if (dy < 2) continue;
    if (g.width < dx + 4 || g.height < dy + 2) continue;

    const std::size_t x0 = rng.below(g.width - dx - 3);
    const std::size_t y0 = rng.below(g.height - dy - 1);

    PairDef pair;
    const std::size_t s = g.vid(x0, y0);
    const std::size_t s1 = g.vid(x0 + 1, y0);
    const std::size_t d1 = g.vid(x0 + 1 + dx, y0 + dy);
    const std::size_t d = g.vid(x0 + 2 + dx, y0 + dy);
    pair.entry = {s, s1};
    pair.exit = {d1, d};

    std::set<std::vector<SegIdx>> seen;
    for (int tries = 0; tries < 500 && pair.routes.size() < n_routes; ++tries) {
      std::vector<LogicalEdge> edges;
      edges.push_back(pair.entry);
      auto middle = staircase(g, s1, d1, rng);
      edges.insert(edges.end(), middle.begin(), middle.end());
      edges.push_back(pair.exit);
      RouteDef route = expand(g, edges);
      if (seen.insert(route.segments).second) {
        pair.routes.push_back(std::move(route));
      }
    }
    if (pair.routes.size() == n_routes) return pair;
  }
  throw validation_error("could not place an SD pair on this grid; enlarge it");
}

std::set<LogicalEdge> pair_edge_set(const PairDef& pair) {
  std::set<LogicalEdge> edges;
  for (const RouteDef& r : pair.routes) {
    edges.insert(r.edges.begin(), r.edges.end());
  }
  return edges;
}

// A base route with a random interior span replaced by an alternative path
// that avoids every forbidden edge; gt marks exactly the replacement.
struct Detoured {
  std::vector<SegIdx> segments;
  std::vector<std::uint8_t> gt;
  std::size_t base_idx = 0;
  std::size_t ea = 0, eb = 0;
  std::vector<std::string> detour_names;
};

std::optional<Detoured> make_detour(const GridWorld& g, const SynthConfig& cfg,
                                    const RouteDef& base, std::size_t base_idx,
                                    const std::set<LogicalEdge>& forbidden,
                                    Rng& rng) {
  const std::size_t n_edges = base.edges.size();
  for (int tries = 0; tries < 60; ++tries) {
    const std::size_t max_cut = std::min(cfg.detour_max, n_edges - 2);
    if (max_cut < cfg.detour_min) return std::nullopt;
    const std::size_t cut_len =
        cfg.detour_min + rng.below(max_cut - cfg.detour_min + 1);
    const std::size_t ea = 1 + rng.below(n_edges - 1 - cut_len);
    const std::size_t eb = ea + cut_len - 1;
    const std::size_t u = base.edges[ea].first;
    const std::size_t v = base.edges[eb].second;

    auto detour_edges = bfs_detour(g, u, v, forbidden, rng);
    if (detour_edges.empty()) continue;

    std::vector<LogicalEdge> edges(base.edges.begin(), base.edges.begin() + ea);
    edges.insert(edges.end(), detour_edges.begin(), detour_edges.end());
    edges.insert(edges.end(), base.edges.begin() + eb + 1, base.edges.end());
    RouteDef full = expand(g, edges);

    Detoured out;
    out.segments = full.segments;
    out.gt.assign(out.segments.size(), 0);
    const std::size_t det_start = full.edge_spans[ea].first;
    const std::size_t det_end = full.edge_spans[ea + detour_edges.size() - 1].second;
    for (std::size_t i = det_start; i <= det_end; ++i) out.gt[i] = 1;
    out.base_idx = base_idx;
    out.ea = ea;
    out.eb = eb;
    for (const LogicalEdge& e : detour_edges) {
      for (SegIdx sidx : g.chains.at(e)) {
        out.detour_names.push_back(g.segments[sidx].id);
      }
    }
    return out;
  }
  return std::nullopt;
}

}  // namespace

SynthOutput generate(const SynthConfig& cfg) {
  if (cfg.anomaly_ratio < 0.0 || cfg.anomaly_ratio > 1.0) {
    throw config_error("anomaly_ratio must be in [0,1]");
  }
  if (cfg.detour_min < 1 || cfg.detour_max < cfg.detour_min) {
    throw config_error("invalid detour length range");
  }
  Rng grid_rng = Rng::substream(cfg.seed, "gen/grid");
  GridWorld g = build_grid(cfg, grid_rng);

  SynthOutput out;
  json manifest;
  manifest["pairs"] = json::array();

  std::vector<MapMatchedTrajectory> trajs;
  std::size_t regenerated_pairs = 0;

  for (std::size_t p = 0; p < cfg.sd_pairs; ++p) {
    Rng rng = Rng::substream(cfg.seed, fmt::format("gen/pair{}", p));

    const std::size_t n_routes = rng.weighted(cfg.route_count_weights) + 1;
    if (n_routes > cfg.route_weights.size() ||
        cfg.route_weights[n_routes - 1].size() != n_routes) {
      throw config_error("route_weights does not cover the drawn route count");
    }

    PairDef pair;
    std::vector<MapMatchedTrajectory> pair_trajs;
    json pair_manifest;
    bool pair_ok = false;

    for (int pair_attempt = 0; pair_attempt < 50 && !pair_ok; ++pair_attempt) {
      if (pair_attempt > 0) ++regenerated_pairs;
      pair = make_pair(g, cfg, rng, n_routes);
      pair.weights = cfg.route_weights[n_routes - 1];
      const std::set<LogicalEdge> forbidden = pair_edge_set(pair);

      const std::size_t n = cfg.trajs_per_pair;
      const std::size_t n_anom = static_cast<std::size_t>(
          std::llround(cfg.anomaly_ratio * static_cast<double>(n)));
      const std::vector<std::size_t> route_counts =
          apportion(n - n_anom, pair.weights);

      pair_trajs.clear();
      pair_manifest = json::object();
      json routes_manifest = json::array();
      for (std::size_t r = 0; r < pair.routes.size(); ++r) {
        json names = json::array();
        for (SegIdx sidx : pair.routes[r].segments) names.push_back(g.segments[sidx].id);
        routes_manifest.push_back({{"segments", std::move(names)},
                                   {"weight", pair.weights[r]},
                                   {"count", route_counts[r]}});
      }

      std::size_t serial = 0;
      for (std::size_t r = 0; r < pair.routes.size(); ++r) {
        for (std::size_t k = 0; k < route_counts[r]; ++k) {
          MapMatchedTrajectory t;
          t.id = fmt::format("p{:03}_t{:05}", p, serial++);
          t.start_time = draw_start_time(cfg, rng, cfg.base_day);
          t.segments = pair.routes[r].segments;
          t.gt_labels = std::vector<std::uint8_t>(t.segments.size(), 0);
          pair_trajs.push_back(std::move(t));
        }
      }

      // detour injection: an anomalous trajectory either reuses the pair's
      // recurring detour route or draws a fresh one
      json anomalies_manifest = json::array();
      bool detours_ok = true;
      std::optional<Detoured> recurring;
      if (n_anom > 0 && cfg.recurring_share > 0.0) {
        const std::size_t base_idx = rng.weighted(pair.weights);
        recurring = make_detour(g, cfg, pair.routes[base_idx], base_idx, forbidden, rng);
        if (!recurring) detours_ok = false;
      }
      for (std::size_t k = 0; detours_ok && k < n_anom; ++k) {
        const bool reuse = recurring && rng.bernoulli(cfg.recurring_share);
        std::optional<Detoured> det = recurring;
        if (!reuse) {
          const std::size_t base_idx = rng.weighted(pair.weights);
          det = make_detour(g, cfg, pair.routes[base_idx], base_idx, forbidden, rng);
        }
        if (!det) {
          detours_ok = false;
          break;
        }
        MapMatchedTrajectory t;
        t.id = fmt::format("p{:03}_t{:05}", p, serial++);
        t.start_time = draw_start_time(cfg, rng, cfg.base_day);
        t.segments = det->segments;
        t.gt_labels = det->gt;
        anomalies_manifest.push_back({{"id", t.id},
                                      {"base_route", det->base_idx},
                                      {"cut_edges", {det->ea, det->eb}},
                                      {"recurring", reuse},
                                      {"detour", det->detour_names}});
        pair_trajs.push_back(std::move(t));
      }
      if (!detours_ok) continue;  // regenerate the pair

      pair_manifest["index"] = p;
      pair_manifest["entry"] = g.segments[g.chains.at(pair.entry).front()].id;
      pair_manifest["exit"] = g.segments[g.chains.at(pair.exit).back()].id;
      pair_manifest["routes"] = std::move(routes_manifest);
      pair_manifest["anomalies"] = std::move(anomalies_manifest);
      pair_ok = true;
    }

    if (!pair_ok) {
      throw validation_error(
          fmt::format("pair {}: no detour placement found; grid too small", p));
    }
    manifest["pairs"].push_back(std::move(pair_manifest));
    for (auto& t : pair_trajs) trajs.push_back(std::move(t));
  }

  manifest["regenerated_pairs"] = regenerated_pairs;
  manifest["seed"] = cfg.seed;
  manifest["grid"] = {cfg.grid_width, cfg.grid_height};
  manifest["trajectories"] = trajs.size();

  out.net = RoadNetwork::from_parts(std::move(g.vertices), std::move(g.segments));
  out.trajectories = std::move(trajs);
  out.manifest_json = manifest.dump(2);
  return out;
}

DriftOutput drift_scenario(const SynthConfig& cfg) {
  Rng grid_rng = Rng::substream(cfg.seed, "drift/grid");
  GridWorld g = build_grid(cfg, grid_rng);

  DriftOutput out;
  json manifest;
  manifest["pairs"] = json::array();

  for (std::size_t p = 0; p < cfg.sd_pairs; ++p) {
    Rng rng = Rng::substream(cfg.seed, fmt::format("drift/pair{}", p));

    // anchored endpoints with both deltas >= 2; the two L-shaped routes
    // share no interior edge
    const std::size_t dist =
        cfg.min_sd_dist + rng.below(cfg.max_sd_dist - cfg.min_sd_dist + 1);
    const std::size_t dx = std::max<std::size_t>(2, dist / 2);
    const std::size_t dy = std::max<std::size_t>(2, dist - dx);
    if (g.width < dx + 4 || g.height < dy + 2) {
      throw config_error("grid too small for the drift scenario distances");
    }
    const std::size_t x0 = rng.below(g.width - dx - 3);
    const std::size_t y0 = rng.below(g.height - dy - 1);
    const std::size_t s = g.vid(x0, y0);
    const std::size_t s1 = g.vid(x0 + 1, y0);
    const std::size_t d1 = g.vid(x0 + 1 + dx, y0 + dy);
    const std::size_t d = g.vid(x0 + 2 + dx, y0 + dy);

    auto l_path = [&](bool x_first) {
      std::vector<LogicalEdge> edges;
      edges.push_back({s, s1});
      std::size_t x = x0 + 1, y = y0;
      auto step_x = [&]() {
        edges.push_back({g.vid(x, y), g.vid(x + 1, y)});
        ++x;
      };
      auto step_y = [&]() {
        edges.push_back({g.vid(x, y), g.vid(x, y + 1)});
        ++y;
      };
      if (x_first) {
        for (std::size_t i = 0; i < dx; ++i) step_x();
        for (std::size_t i = 0; i < dy; ++i) step_y();
      } else {
        for (std::size_t i = 0; i < dy; ++i) step_y();
        for (std::size_t i = 0; i < dx; ++i) step_x();
      }
      edges.push_back({d1, d});
      return expand(g, edges);
    };

    const RouteDef route_a = l_path(true);
    const RouteDef route_b = l_path(false);
    std::set<LogicalEdge> forbidden;
    forbidden.insert(route_a.edges.begin(), route_a.edges.end());
    forbidden.insert(route_b.edges.begin(), route_b.edges.end());

    // each part carries the swapped rare route plus ordinary one-off
    // detours, so models still have generic anomalies to learn from
    auto emit_part = [&](std::vector<MapMatchedTrajectory>& sink, const RouteDef& normal,
                         const RouteDef& anomalous, std::int64_t day, int part) {
      const std::size_t n = cfg.trajs_per_pair;
      const std::size_t n_swap = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n))));
      const std::size_t n_detour = static_cast<std::size_t>(
          std::llround(cfg.anomaly_ratio * static_cast<double>(n)));
      for (std::size_t k = 0; k < n; ++k) {
        MapMatchedTrajectory t;
        t.id = fmt::format("p{:03}_part{}_t{:05}", p, part, k);
        t.start_time = draw_start_time(cfg, rng, day);
        if (k < n_swap) {
          t.segments = anomalous.segments;
          std::vector<std::uint8_t> gt(t.segments.size(), 0);
          // interior segments are all distinctive: only entry/exit shared
          for (std::size_t i = 1; i + 1 < gt.size(); ++i) gt[i] = 1;
          t.gt_labels = std::move(gt);
        } else if (k < n_swap + n_detour) {
          auto det = make_detour(g, cfg, normal, 0, forbidden, rng);
          if (!det) {
            throw validation_error(
                fmt::format("drift pair {}: no detour placement found", p));
          }
          t.segments = std::move(det->segments);
          t.gt_labels = std::move(det->gt);
        } else {
          t.segments = normal.segments;
          t.gt_labels = std::vector<std::uint8_t>(t.segments.size(), 0);
        }
        sink.push_back(std::move(t));
      }
    };

    emit_part(out.part1, route_a, route_b, cfg.base_day, 1);
    emit_part(out.part2, route_b, route_a, cfg.base_day + 1, 2);

    json jp;
    jp["index"] = p;
    json a_names = json::array(), b_names = json::array();
    for (SegIdx sidx : route_a.segments) a_names.push_back(g.segments[sidx].id);
    for (SegIdx sidx : route_b.segments) b_names.push_back(g.segments[sidx].id);
    jp["route_a"] = std::move(a_names);
    jp["route_b"] = std::move(b_names);
    manifest["pairs"].push_back(std::move(jp));
  }

  manifest["seed"] = cfg.seed;
  manifest["scenario"] = "drift_swap";
  out.net = RoadNetwork::from_parts(std::move(g.vertices), std::move(g.segments));
  out.manifest_json = manifest.dump(2);
  return out;
}

}  // namespace oasd
