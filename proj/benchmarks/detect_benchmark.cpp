// Microbenchmarks for the per-point detection path and its kernels.
#include <benchmark/benchmark.h>

#include "oasd/asdnet.hpp"
#include "oasd/checkpoint.hpp"
#include "oasd/detector.hpp"
#include "oasd/groupstats.hpp"
#include "oasd/synthgen.hpp"

namespace {

using namespace oasd;

struct World {
  RoadNetwork net;
  StatsStore store;
  ModelState model;
  std::vector<MapMatchedTrajectory> trajs;
};

const World& world() {
  static World w = [] {
    SynthConfig cfg;
    cfg.grid_width = 34;
    cfg.grid_height = 34;
    cfg.sd_pairs = 24;
    cfg.trajs_per_pair = 30;
    cfg.min_sd_dist = 10;
    cfg.max_sd_dist = 52;
    cfg.detour_min = 4;
    cfg.detour_max = 8;
    cfg.seed = 7;
    auto out = generate(cfg);

    World built;
    built.store = build_stats(out.trajectories, cfg.slots_per_day);
    ModelConfig mc;
    mc.vocab = out.net.segment_count();
    built.model = ModelState::init(mc);
    built.net = std::move(out.net);
    built.trajs = std::move(out.trajectories);
    return built;
  }();
  return w;
}

void BM_LstmStep(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  auto params = nn::LstmParams::init(dim, dim, rng);
  auto lstm = nn::LstmState::zeros(dim);
  Tensor x = Tensor::uniform({dim}, -1.0, 1.0, rng);
  for (auto _ : state) {
    lstm = nn::lstm_step(params, x, lstm);
    benchmark::DoNotOptimize(lstm.h);
  }
}
BENCHMARK(BM_LstmStep)->Arg(32)->Arg(128);

void BM_PushPoint(benchmark::State& state) {
  const World& w = world();
  SessionConfig cfg;
  cfg.delay = 8;
  std::size_t traj_idx = 0;
  std::size_t points = 0;
  for (auto _ : state) {
    const auto& traj = w.trajs[traj_idx];
    traj_idx = (traj_idx + 1) % w.trajs.size();
    DetectionSession session(w.net, w.store, w.model.rsr, w.model.policy, traj.id,
                             traj.sd(), traj.start_time, cfg);
    for (std::size_t i = 0; i < traj.length(); ++i) {
      auto events = session.push_point(traj.segments[i], i == traj.length() - 1);
      benchmark::DoNotOptimize(events);
    }
    points += traj.length();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(points));
}
BENCHMARK(BM_PushPoint);

void BM_DetectByLength(benchmark::State& state) {
  const World& w = world();
  const auto lo = static_cast<std::size_t>(state.range(0));
  const auto hi = static_cast<std::size_t>(state.range(1));
  std::vector<const MapMatchedTrajectory*> group;
  for (const auto& t : w.trajs) {
    if (t.length() >= lo && t.length() < hi) group.push_back(&t);
  }
  if (group.empty()) {
    state.SkipWithError("no trajectories in this length group");
    return;
  }
  SessionConfig cfg;
  cfg.delay = 8;
  std::size_t idx = 0;
  std::size_t points = 0;
  for (auto _ : state) {
    const auto& traj = *group[idx];
    idx = (idx + 1) % group.size();
    auto result = detect_trajectory(w.net, w.store, w.model.rsr, w.model.policy, traj,
                                    cfg);
    benchmark::DoNotOptimize(result);
    points += traj.length();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(points));
}
BENCHMARK(BM_DetectByLength)->Args({2, 15})->Args({15, 30})->Args({30, 45})->Args({45, 1000});

}  // namespace

BENCHMARK_MAIN();
