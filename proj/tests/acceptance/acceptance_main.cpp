// Acceptance suite: one check per shipped guarantee, one PASS/FAIL line
// each. Library-level checks run in process; the pipeline checks drive the
// oasd binary end to end inside a scratch directory.
//
//   acceptance_tests --oasd <path-to-oasd> --workdir <scratch-dir>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metrics_reference.hpp"
#include "oasd/asdnet.hpp"
#include "oasd/checkpoint.hpp"
#include "oasd/detector.hpp"
#include "oasd/groupstats.hpp"
#include "oasd/metrics.hpp"
#include "oasd/rng.hpp"
#include "oasd/roadnet.hpp"
#include "oasd/synthgen.hpp"
#include "oasd/trajio.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oasd;

namespace {

std::string g_oasd;
fs::path g_workdir;
int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void report(const std::string& id, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << id << ": " << detail << std::endl;
  if (!ok) ++g_failures;
}

bool run_cmd(const std::string& args) {
  const std::string cmd = g_oasd + " " + args;
  const int rc = std::system(cmd.c_str());
  if (rc != 0) std::cout << "  command failed (" << rc << "): " << cmd << "\n";
  return rc == 0;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing file " + path.string());
  return json::parse(in);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt_f(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

// ---------------------------------------------------------------------------
// C1: the three-route worked example reproduces bit-exactly.

void criterion1() {
  Timer timer;
  auto world = test::make_three_route_world();
  StatsStore store = build_stats(world.corpus, 24, 0.5, /*delta=*/0.3);
  const GroupKey key = store.key_for(world.t3);

  bool ok = true;

  const SegIdx e1 = world.net.require_segment("e1");
  const SegIdx e2 = world.net.require_segment("e2");
  ok &= store.transition_fraction(key, e1, e2, false) == 0.5;

  const std::vector<double> expected_fractions{1.0, 0.5, 0.5, 0.1, 0.1,
                                               0.1, 0.1, 0.1, 1.0};
  ok &= store.fraction_sequence(world.t3) == expected_fractions;

  const std::vector<std::uint8_t> expected_labels{0, 1, 1, 1, 1, 1, 1, 1, 0};
  ok &= store.noisy_labels(world.t3) == expected_labels;

  auto routes = store.normal_routes(key);
  ok &= routes.size() == 2;
  bool has_t1 = false, has_t2 = false;
  for (const auto& r : routes) {
    has_t1 |= r == world.t1.segments;
    has_t2 |= r == world.t2.segments;
  }
  ok &= has_t1 && has_t2;

  const std::vector<std::uint8_t> expected_nrf{0, 0, 0, 1, 1, 1, 1, 1, 0};
  ok &= store.nrf(world.t3) == expected_nrf;

  report("C1 worked-example fidelity", ok,
         "fraction 0.5, sequence/labels/routes/features exact (" +
             fmt_f(timer.seconds()) + " s)");
}

// ---------------------------------------------------------------------------
// C2: rule table exhaustive + rule consistency on random trajectories.

RoadNetwork degree_world(std::size_t out_deg, std::size_t in_deg) {
  std::vector<RoadNetwork::Vertex> vs;
  std::vector<RoadNetwork::Segment> ss;
  auto v = [&](const std::string& id) {
    vs.push_back({id, 0.0, 0.0});
    return static_cast<VertexIdx>(vs.size() - 1);
  };
  const VertexIdx p0 = v("p0"), m = v("m"), q = v("q");
  ss.push_back({"prev", p0, m, 1.0});
  ss.push_back({"cur", m, q, 1.0});
  for (std::size_t i = 1; i < out_deg; ++i) {
    ss.push_back({"out" + std::to_string(i), m, v("o" + std::to_string(i)), 1.0});
  }
  for (std::size_t i = 1; i < in_deg; ++i) {
    ss.push_back({"in" + std::to_string(i), v("i" + std::to_string(i)), m, 1.0});
  }
  return RoadNetwork::from_parts(std::move(vs), std::move(ss));
}

void criterion2() {
  Timer timer;
  bool table_ok = true;
  for (std::size_t out = 1; out <= 3; ++out) {
    for (std::size_t in = 1; in <= 3; ++in) {
      RoadNetwork net = degree_world(out, in);
      const SegIdx prev = net.require_segment("prev");
      const SegIdx cur = net.require_segment("cur");
      for (int prev_label : {0, 1}) {
        RnelDecision expected = RnelDecision::NotDetermined;
        if (out == 1 && in == 1) {
          expected = prev_label == 0 ? RnelDecision::Normal : RnelDecision::Anomalous;
        } else if (out == 1 && in > 1 && prev_label == 0) {
          expected = RnelDecision::Normal;
        } else if (out > 1 && in == 1 && prev_label == 1) {
          expected = RnelDecision::Anomalous;
        }
        table_ok &= rnel_decide(net, prev, cur, prev_label) == expected;
      }
    }
  }

  SynthConfig cfg;
  cfg.grid_width = 14;
  cfg.grid_height = 14;
  cfg.sd_pairs = 25;
  cfg.trajs_per_pair = 40;
  cfg.min_sd_dist = 8;
  cfg.max_sd_dist = 12;
  cfg.detour_min = 3;
  cfg.detour_max = 6;
  cfg.anomaly_ratio = 0.05;
  cfg.corridor_edges = 40;
  cfg.seed = 424242;
  auto world = generate(cfg);
  StatsStore store = build_stats(world.trajectories, 24, 0.5, 0.4);
  Rng rng(11);
  RsrParams rsr = RsrParams::init(world.net.segment_count(), 8, 8, rng);
  PolicyParams pol = PolicyParams::init(rsr.z_dim(), 8, rng);

  SessionConfig scfg;
  scfg.delay = 8;
  std::size_t checked = 0;
  bool consistent = true;
  for (const auto& traj : world.trajectories) {
    if (checked >= 1000) break;
    ++checked;
    DetectionResult res = detect_trajectory(world.net, store, rsr, pol, traj, scfg);
    const auto& labels = res.pre_delay_labels;
    for (std::size_t i = 1; i + 1 < labels.size(); ++i) {
      const std::size_t out = world.net.out_degree(traj.segments[i - 1]);
      const std::size_t in = world.net.in_degree(traj.segments[i]);
      if (out == 1 && in == 1) consistent &= labels[i] == labels[i - 1];
      if (out == 1 && in > 1 && labels[i - 1] == 0) consistent &= labels[i] == 0;
      if (out > 1 && in == 1 && labels[i - 1] == 1) consistent &= labels[i] == 1;
    }
  }

  const double secs = timer.seconds();
  report("C2 RNEL soundness", table_ok && consistent && checked >= 1000 && secs < 10.0,
         "18-case table exact, " + std::to_string(checked) +
             " random trajectories rule-consistent (" + fmt_f(secs) + " s)");
}

// ---------------------------------------------------------------------------
// C3: analytic gradients match central finite differences.

void criterion3() {
  Timer timer;
  double worst = 0.0;
  Rng seed_rng(909);
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng(seed_rng.next_u64());
    const std::size_t vocab = 2 + rng.below(7);
    const std::size_t de = 1 + rng.below(8);
    const std::size_t dh = 1 + rng.below(8);
    const std::size_t dl = 1 + rng.below(8);
    const std::size_t n = 2 + rng.below(7);

    RsrParams rsr = RsrParams::init(vocab, de, dh, rng);
    std::vector<SegIdx> segs;
    std::vector<std::uint8_t> nrf, labels;
    for (std::size_t i = 0; i < n; ++i) {
      segs.push_back(static_cast<SegIdx>(rng.below(vocab)));
      nrf.push_back(static_cast<std::uint8_t>(rng.below(2)));
      labels.push_back(static_cast<std::uint8_t>(rng.below(2)));
    }

    auto loss = [&]() { return rsr_sequence_loss(rsr, segs, nrf, labels); };
    RsrForward fwd = rsr_forward(rsr, segs, nrf);
    RsrGrads grads = RsrGrads::zeros(rsr);
    rsr_backward(rsr, segs, fwd, labels, grads);
    worst = std::max(
        {worst,
         nn::finite_diff_check(loss, rsr.embedding.span(), grads.embedding.span()),
         nn::finite_diff_check(loss, rsr.lstm.w_x.span(), grads.lstm.w_x.span()),
         nn::finite_diff_check(loss, rsr.lstm.w_h.span(), grads.lstm.w_h.span()),
         nn::finite_diff_check(loss, rsr.lstm.bias.span(), grads.lstm.bias.span()),
         nn::finite_diff_check(loss, rsr.head_w.span(), grads.head_w.span()),
         nn::finite_diff_check(loss, rsr.head_b.span(), grads.head_b.span())});

    // policy log-prob gradient
    PolicyParams pol = PolicyParams::init(dh + 2, dl, rng);
    Tensor z = Tensor::uniform({dh + 2}, -1.0, 1.0, rng);
    const int prev_label = static_cast<int>(rng.below(2));
    const int action = static_cast<int>(rng.below(2));
    auto logp = [&]() {
      Tensor s = make_state(z, prev_label, pol);
      return std::log(nn::linear_softmax(pol.head_w, pol.head_b, s)[action]);
    };
    Tensor state = make_state(z, prev_label, pol);
    Tensor probs = nn::linear_softmax(pol.head_w, pol.head_b, state);
    PolicyGrads pgrads = PolicyGrads::zeros(pol);
    Tensor d_logits = nn::logprob_logit_grad(probs, action, 1.0);
    Tensor d_state = Tensor::zeros({pol.state_dim()});
    nn::linear_backward(pol.head_w, state, d_logits, pgrads.head_w, pgrads.head_b,
                        &d_state);
    auto row = pgrads.label_embed.row(static_cast<std::size_t>(prev_label));
    for (std::size_t i = 0; i < dl; ++i) row[i] += d_state[dh + 2 + i];
    worst = std::max(
        {worst,
         nn::finite_diff_check(logp, pol.head_w.span(), pgrads.head_w.span()),
         nn::finite_diff_check(logp, pol.head_b.span(), pgrads.head_b.span()),
         nn::finite_diff_check(logp, pol.label_embed.span(),
                               pgrads.label_embed.span())});
  }
  const double secs = timer.seconds();
  report("C3 gradient correctness", worst < 1e-4 && secs < 30.0,
         "max relative error " + fmt_f(worst) + " over 20 instances (" + fmt_f(secs) +
             " s)");
}

// ---------------------------------------------------------------------------
// C4: evaluate() equals the brute-force reference on random corpora.

void criterion4() {
  Timer timer;
  Rng rng(777);
  bool ok = true;
  for (int trial = 0; trial < 500 && ok; ++trial) {
    LabeledCorpus corpus;
    const std::size_t n_traj = 1 + rng.below(20);
    for (std::size_t t = 0; t < n_traj; ++t) {
      const std::size_t n = 3 + rng.below(28);
      TrajectoryLabels labels;
      labels.id = "t" + std::to_string(t);
      labels.gt.assign(n, 0);
      labels.detected.assign(n, 0);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        labels.gt[i] = rng.bernoulli(0.3) ? 1 : 0;
        labels.detected[i] = rng.bernoulli(0.3) ? 1 : 0;
      }
      corpus.push_back(std::move(labels));
    }
    EvalReport rep = evaluate(corpus, 0.5);
    test::RefReport ref = test::reference_evaluate(corpus, 0.5);
    ok &= rep.jaccard_sum == ref.j && rep.gt_runs == ref.cg &&
          rep.detected_runs == ref.co && rep.precision == ref.p &&
          rep.recall == ref.r && rep.f1 == ref.f1 && rep.tf1 == ref.tf1;
  }

  // adding a false-positive run dilutes precision and leaves recall fixed
  LabeledCorpus base;
  base.push_back({"a", {0, 1, 1, 0}, {0, 1, 1, 0}});
  LabeledCorpus noisy = base;
  noisy.push_back({"b", {0, 0, 0, 0}, {0, 1, 0, 0}});
  EvalReport rb = evaluate(base, 0.5);
  EvalReport rn = evaluate(noisy, 0.5);
  ok &= rn.precision < rb.precision && rn.recall == rb.recall;

  const double secs = timer.seconds();
  report("C4 metric oracle equivalence", ok && secs < 10.0,
         "500 random corpora exact, fragmentation penalizes precision (" +
             fmt_f(secs) + " s)");
}

// ---------------------------------------------------------------------------
// C5: delayed-labeling contract on random label streams.

void criterion5() {
  Timer timer;
  Rng rng(555);
  bool ok = true;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    const std::size_t delay = trial % 3 == 0 ? 8 : rng.below(12);
    std::vector<int> stream;
    for (std::size_t i = 0; i < n; ++i) stream.push_back(rng.bernoulli(0.35) ? 1 : 0);

    DelayedRunMerger merger(delay);
    std::vector<std::uint8_t> final_labels(n, 2);
    std::vector<std::size_t> finalized_at(n, 0);
    std::size_t arrived = 0;
    auto apply = [&](const DelayedRunMerger::Output& out) {
      for (auto [idx, lab] : out.finalized) {
        final_labels[idx] = static_cast<std::uint8_t>(lab);
        finalized_at[idx] = arrived;
      }
    };
    for (int l : stream) {
      ++arrived;
      apply(merger.push(l));
      ok &= merger.pending_size() <= delay + 1;
    }
    apply(merger.finish());

    for (std::size_t i = 0; i < n && ok; ++i) {
      ok &= final_labels[i] != 2;  // everything finalized
      if (delay == 0) ok &= final_labels[i] == static_cast<std::uint8_t>(stream[i]);
      if (stream[i] == 1) ok &= final_labels[i] == 1;  // rewrites only 0 -> 1
      if (finalized_at[i] > 0 && finalized_at[i] < n) {
        ok &= finalized_at[i] <= i + 1 + delay + 1;  // emission latency
      }
      if (stream[i] == 0 && final_labels[i] == 1) {
        // a rewrite needs a 1 within D positions to its right and an open
        // run to its left
        bool right = false;
        for (std::size_t k = i + 1; k < std::min(n, i + 1 + delay); ++k) {
          right |= stream[k] == 1;
        }
        bool left = false;
        for (std::size_t k = i; k-- > 0;) {
          if (stream[k] == 1) {
            left = true;
            break;
          }
          if (final_labels[k] == 0) break;
        }
        ok &= left && right;
      }
    }
  }
  const double secs = timer.seconds();
  report("C5 delayed-labeling contract", ok && secs < 10.0,
         "1000 random streams, D=0 identity and bounded rewrites (" + fmt_f(secs) +
             " s)");
}

// ---------------------------------------------------------------------------
// C6/C8/C10 share the synthetic benchmark pipeline.

struct PipelineArtifacts {
  fs::path dir;
  double model_f1 = 0.0;
  double baseline_f1 = 0.0;
  bool ok = false;
};

PipelineArtifacts run_benchmark_pipeline(const fs::path& dir) {
  PipelineArtifacts art;
  art.dir = dir;
  fs::create_directories(dir);
  const std::string d = dir.string();
  const std::string seed = " --seed 20406";

  // 50 pairs x 400 trajectories, ~2% anomalies, half of them recurring
  // routes; 30 test + 20 eval held out per pair and a 40-per-pair training
  // pool (2000 trajectories total, shared by pretraining and the joint loop)
  bool ok = run_cmd("gen --out " + d +
                    " --pairs 50 --trajs-per-pair 400 --grid-width 26"
                    " --grid-height 26 --min-dist 16 --max-dist 20"
                    " --detour-min 9 --detour-max 15 --anomaly-ratio 0.02"
                    " --recurring-share 0.5 --route-count-weights 1,0,0"
                    " --corridor 12 --holdout-eval 20 --holdout-test 30"
                    " --holdout-train 40" +
                    seed);
  ok = ok && run_cmd("preprocess --network " + d + "/network.json --trajectories " +
                     d + "/trajectories.jsonl --out " + d + "/stats.json" + seed);
  ok = ok && run_cmd("pretrain --network " + d + "/network.json --trajectories " + d +
                     "/train.jsonl --stats " + d + "/stats.json --out " + d +
                     "/model_pre.json --count 2000 --epochs 8 --policy-epochs 30" +
                     seed);
  ok = ok && run_cmd("train --network " + d + "/network.json --trajectories " + d +
                     "/train.jsonl --stats " + d + "/stats.json --model " + d +
                     "/model_pre.json --out " + d +
                     "/model.json"
                     " --eval-trajectories " +
                     d +
                     "/eval.jsonl --train-count 2000"
                     " --eval-every 200 --lr-asd 0.0001 --log " +
                     d + "/train_log.jsonl" + seed);
  ok = ok && run_cmd("detect --network " + d + "/network.json --stats " + d +
                     "/stats.json --model " + d + "/model.json --trajectories " + d +
                     "/test.jsonl --out " + d + "/events.jsonl" + seed);
  ok = ok && run_cmd("eval --network " + d + "/network.json --gt " + d +
                     "/test.jsonl --events " + d + "/events.jsonl --out " + d +
                     "/report.json > /dev/null");
  ok = ok && run_cmd("detect --network " + d + "/network.json --stats " + d +
                     "/stats.json --baseline --trajectories " + d +
                     "/test.jsonl --out " + d + "/events_baseline.jsonl");
  ok = ok && run_cmd("eval --network " + d + "/network.json --gt " + d +
                     "/test.jsonl --events " + d + "/events_baseline.jsonl --out " +
                     d + "/report_baseline.json > /dev/null");
  if (!ok) return art;

  art.model_f1 = read_json(dir / "report.json").at("f1").get<double>();
  art.baseline_f1 = read_json(dir / "report_baseline.json").at("f1").get<double>();
  art.ok = true;
  return art;
}

PipelineArtifacts g_bench;

void criterion6() {
  Timer timer;
  g_bench = run_benchmark_pipeline(g_workdir / "bench");
  const double secs = timer.seconds();
  const bool ok = g_bench.ok && g_bench.model_f1 >= 0.85 &&
                  g_bench.model_f1 >= g_bench.baseline_f1 - 0.02 && secs < 600.0;
  report("C6 end-to-end synthetic benchmark", ok,
         "trained F1 " + fmt_f(g_bench.model_f1) + " vs baseline " +
             fmt_f(g_bench.baseline_f1) + " on held-out test (" + fmt_f(secs) + " s)");
}

// ---------------------------------------------------------------------------
// C7: concept drift, frozen vs fine-tuned on the swapped partition.

void criterion7() {
  Timer timer;
  const fs::path dir = g_workdir / "drift";
  fs::create_directories(dir);
  const std::string d = dir.string();

  bool ok = run_cmd("gen --out " + d +
                    " --drift --pairs 10 --trajs-per-pair 200 --grid-width 26"
                    " --grid-height 26 --min-dist 14 --max-dist 18 --detour-min 6"
                    " --detour-max 10 --anomaly-ratio 0.03 --seed 31");
  ok = ok && run_cmd("drift --network " + d + "/network.json --trajectories " + d +
                     "/trajectories.jsonl --xi 2 --pretrain-count 1500"
                     " --policy-epochs 30 --train-count 1200 --out " +
                     d + "/report.json --seed 31 > /dev/null");
  double frozen = 0.0, tuned = 0.0;
  if (ok) {
    const json rep = read_json(dir / "report.json");
    for (const auto& row : rep.at("parts")) {
      if (row.at("part").get<int>() == 2) {
        frozen = row.at("frozen_f1").get<double>();
        tuned = row.at("finetuned_f1").get<double>();
      }
    }
  }
  const double secs = timer.seconds();
  ok = ok && (tuned - frozen >= 0.1) && secs < 600.0;
  report("C7 concept drift", ok,
         "part 2: fine-tuned " + fmt_f(tuned) + " vs frozen " + fmt_f(frozen) + " (" +
             fmt_f(secs) + " s)");
}

// ---------------------------------------------------------------------------
// C8: cold start via history dropping on the benchmark artifacts.

void criterion8() {
  Timer timer;
  if (!g_bench.ok) {
    report("C8 cold start", false, "benchmark pipeline unavailable");
    return;
  }
  const std::string d = g_bench.dir.string();
  bool ok = run_cmd("coldstart --network " + d + "/network.json --stats " + d +
                    "/stats.json --model " + d + "/model.json --test " + d +
                    "/test.jsonl --drop-rates 0,0.4,0.8 --out " + d +
                    "/coldstart.json --seed 20406 > /dev/null");
  double f0 = 0.0, f8 = 0.0;
  bool monotone = true;
  if (ok) {
    const json rep = read_json(g_bench.dir / "coldstart.json");
    double prev = 2.0;
    for (const auto& row : rep.at("rows")) {
      const double f1 = row.at("f1").get<double>();
      const double rate = row.at("drop_rate").get<double>();
      if (rate == 0.0) f0 = f1;
      if (rate == 0.8) f8 = f1;
      monotone &= f1 <= prev + 0.03;
      prev = f1;
    }
  }
  const double secs = timer.seconds();
  ok = ok && f0 == g_bench.model_f1 && (f0 - f8) <= 0.10 && monotone && secs < 600.0;
  report("C8 cold start", ok,
         "F1 " + fmt_f(f0) + " -> " + fmt_f(f8) + " at 80% drop (" + fmt_f(secs) +
             " s)");
}

// ---------------------------------------------------------------------------
// C9: per-point latency and O(1) scaling across length groups.

void criterion9() {
  Timer timer;
  const fs::path dir = g_workdir / "latency";
  fs::create_directories(dir);
  const std::string d = dir.string();

  bool ok = run_cmd("gen --out " + d +
                    " --pairs 40 --trajs-per-pair 20 --grid-width 34 --grid-height 34"
                    " --min-dist 12 --max-dist 52 --detour-min 4 --detour-max 8"
                    " --anomaly-ratio 0.02 --route-count-weights 1,0,0 --corridor 30"
                    " --seed 99");
  ok = ok && run_cmd("preprocess --network " + d + "/network.json --trajectories " +
                     d + "/trajectories.jsonl --out " + d + "/stats.json --seed 99");
  ok = ok && run_cmd("pretrain --network " + d + "/network.json --trajectories " + d +
                     "/trajectories.jsonl --stats " + d + "/stats.json --out " + d +
                     "/model.json --count 200 --epochs 2 --seed 99");
  ok = ok && run_cmd("bench --network " + d + "/network.json --stats " + d +
                     "/stats.json --model " + d + "/model.json --trajectories " + d +
                     "/trajectories.jsonl --out " + d + "/bench.json > /dev/null");
  double median_us = 1e9, g1 = 0.0, g4 = 1e9;
  std::size_t g1_points = 0, g4_points = 0;
  if (ok) {
    const json rep = read_json(dir / "bench.json");
    median_us = rep.at("overall").at("median_us").get<double>();
    g1 = rep.at("G1").at("median_us").get<double>();
    g4 = rep.at("G4").at("median_us").get<double>();
    g1_points = rep.at("G1").at("points").get<std::size_t>();
    g4_points = rep.at("G4").at("points").get<std::size_t>();
  }
  const double secs = timer.seconds();
  ok = ok && median_us < 500.0 && g1_points > 0 && g4_points > 0 && g4 <= 2.0 * g1 &&
       secs < 120.0;
  report("C9 online efficiency", ok,
         "median " + fmt_f(median_us) + " us/point, G4/G1 ratio " +
             fmt_f(g1 > 0 ? g4 / g1 : 0.0) + " (" + fmt_f(secs) + " s)");
}

// ---------------------------------------------------------------------------
// C10: the whole pipeline is bit-reproducible under the master seed.

void criterion10() {
  Timer timer;
  if (!g_bench.ok) {
    report("C10 determinism", false, "benchmark pipeline unavailable");
    return;
  }
  PipelineArtifacts rerun = run_benchmark_pipeline(g_workdir / "bench_rerun");
  bool ok = rerun.ok;
  std::string mismatch;
  for (const char* name :
       {"network.json", "trajectories.jsonl", "train.jsonl", "eval.jsonl",
        "test.jsonl", "stats.json", "model_pre.json", "model.json", "events.jsonl",
        "report.json", "events_baseline.jsonl", "report_baseline.json",
        "train_log.jsonl"}) {
    if (!ok) break;
    if (read_file(g_bench.dir / name) != read_file(rerun.dir / name)) {
      ok = false;
      mismatch = name;
    }
  }
  const double secs = timer.seconds();
  report("C10 determinism", ok,
         ok ? "13 artifacts byte-identical across reruns (" + fmt_f(secs) + " s)"
            : "mismatch in " + mismatch);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--oasd") g_oasd = argv[i + 1];
    if (arg == "--workdir") g_workdir = argv[i + 1];
  }
  if (g_oasd.empty() || g_workdir.empty()) {
    std::cerr << "usage: acceptance --oasd <binary> --workdir <dir>\n";
    return 2;
  }
  fs::remove_all(g_workdir);
  fs::create_directories(g_workdir);

  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                : std::to_string(g_failures) + " CRITERIA FAILED")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
