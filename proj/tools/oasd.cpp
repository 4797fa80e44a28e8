// oasd: online anomalous-subtrajectory detection over road networks.
// Subcommands cover the full pipeline: gen, preprocess, pretrain, train,
// detect, eval, drift, coldstart, bench.
#include <algorithm>
#include <chrono>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oasd/asdnet.hpp"
#include "oasd/checkpoint.hpp"
#include "oasd/detector.hpp"
#include "oasd/error.hpp"
#include "oasd/groupstats.hpp"
#include "oasd/metrics.hpp"
#include "oasd/rng.hpp"
#include "oasd/roadnet.hpp"
#include "oasd/synthgen.hpp"
#include "oasd/trajio.hpp"
#include "pipeline.hpp"

namespace {

using nlohmann::json;
using namespace oasd;
using namespace oasd::cli;

// Flags shared across subcommands, overridable by --config JSON.
struct GlobalOpts {
  std::string config_path;
  bool lr_rsr_set = false;
  bool lr_asd_set = false;
  double alpha = 0.5;
  double delta = 0.4;
  std::size_t delay = 8;
  double phi = 0.5;
  int slots = 24;
  std::string profile = "desk";
  std::uint64_t seed = 1;
  std::size_t xi = 2;
  std::vector<double> drop_rates = {0.0, 0.2, 0.4, 0.6, 0.8};
  std::string mode = "greedy";
  std::int64_t utc_offset = 0;
  double lr_rsr = 0.01;
  double lr_asd = 0.001;
};

Mode parse_mode(const std::string& mode) {
  if (mode == "greedy") return Mode::Greedy;
  if (mode == "sample") return Mode::Sample;
  throw config_error("mode must be greedy or sample, got '" + mode + "'");
}

// --config values apply before flag parsing, so explicit flags win.
void apply_config_file(GlobalOpts& g, int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") g.config_path = argv[i + 1];
  }
  if (g.config_path.empty()) return;
  json cfg;
  try {
    cfg = json::parse(read_text_file(g.config_path));
  } catch (const json::parse_error& e) {
    throw parse_error(std::string("config file: ") + e.what());
  }
  g.alpha = cfg.value("alpha", g.alpha);
  g.delta = cfg.value("delta", g.delta);
  g.delay = cfg.value("delay_d", g.delay);
  g.phi = cfg.value("phi", g.phi);
  g.slots = cfg.value("slots", g.slots);
  g.profile = cfg.value("profile", g.profile);
  g.seed = cfg.value("seed", g.seed);
  g.xi = cfg.value("xi", g.xi);
  g.mode = cfg.value("mode", g.mode);
  g.utc_offset = cfg.value("utc_offset", g.utc_offset);
  g.lr_rsr = cfg.value("lr_rsr", g.lr_rsr);
  g.lr_asd = cfg.value("lr_asd", g.lr_asd);
  if (cfg.contains("drop_rates")) {
    g.drop_rates = cfg.at("drop_rates").get<std::vector<double>>();
  }
}

void add_global_flags(CLI::App& app, GlobalOpts& g) {
  app.add_option("--config", g.config_path, "JSON config file (flags override it)");
  app.add_option("--alpha", g.alpha, "noisy-label threshold");
  app.add_option("--delta", g.delta, "normal-route threshold");
  app.add_option("--delay-d", g.delay, "delayed-labeling window D");
  app.add_option("--phi", g.phi, "TF1 Jaccard threshold");
  app.add_option("--slots", g.slots, "time slots per day");
  app.add_option("--profile", g.profile, "dimension profile: desk|paper");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--xi", g.xi, "drift partitions");
  app.add_option("--drop-rates", g.drop_rates, "cold-start drop rates")
      ->delimiter(',');
  app.add_option("--mode", g.mode, "action mode: greedy|sample");
  app.add_option("--utc-offset", g.utc_offset, "seconds added before slotting");
  app.add_option("--lr-rsr", g.lr_rsr, "representation learning rate");
  app.add_option("--lr-asd", g.lr_asd, "policy learning rate");
}

ModelConfig model_config_from(const GlobalOpts& g, std::size_t vocab) {
  ModelConfig mc;
  mc.vocab = vocab;
  apply_profile(mc, g.profile);
  mc.alpha = g.alpha;
  mc.delta = g.delta;
  mc.delay = g.delay;
  mc.slots_per_day = g.slots;
  mc.lr_rsr = g.lr_rsr;
  mc.lr_asd = g.lr_asd;
  mc.seed = g.seed;
  return mc;
}

// ---------------------------------------------------------------------------
// gen

struct GenOpts {
  std::string out_dir;
  SynthConfig synth;
  bool drift = false;
  std::size_t holdout_eval = 0;
  std::size_t holdout_test = 0;
  std::size_t holdout_train = 0;
};

void cmd_gen(const GlobalOpts& g, const GenOpts& opts) {
  SynthConfig cfg = opts.synth;
  cfg.seed = g.seed;
  cfg.slots_per_day = g.slots;

  if (opts.drift) {
    DriftOutput out = drift_scenario(cfg);
    out.net.save_file(opts.out_dir + "/network.json");
    std::vector<MapMatchedTrajectory> all = out.part1;
    all.insert(all.end(), out.part2.begin(), out.part2.end());
    save_trajectories_file(opts.out_dir + "/trajectories.jsonl", out.net, all);
    write_text_file(opts.out_dir + "/manifest.json", out.manifest_json + "\n");
    log_info("drift scenario: " + std::to_string(all.size()) + " trajectories");
    return;
  }

  SynthOutput out = generate(cfg);
  out.net.save_file(opts.out_dir + "/network.json");
  if (opts.holdout_eval > 0 || opts.holdout_test > 0) {
    SplitCorpus split = split_corpus(out.trajectories, opts.holdout_eval,
                                     opts.holdout_test, cfg.seed, opts.holdout_train);
    save_trajectories_file(opts.out_dir + "/trajectories.jsonl", out.net, split.rest);
    save_trajectories_file(opts.out_dir + "/eval.jsonl", out.net, split.eval);
    save_trajectories_file(opts.out_dir + "/test.jsonl", out.net, split.test);
    if (opts.holdout_train > 0) {
      save_trajectories_file(opts.out_dir + "/train.jsonl", out.net, split.train);
    }
  } else {
    save_trajectories_file(opts.out_dir + "/trajectories.jsonl", out.net,
                           out.trajectories);
  }
  write_text_file(opts.out_dir + "/manifest.json", out.manifest_json + "\n");
  log_info("generated " + std::to_string(out.trajectories.size()) + " trajectories");
}

// ---------------------------------------------------------------------------
// preprocess

void cmd_preprocess(const GlobalOpts& g, const std::string& network_path,
                    const std::string& traj_path, const std::string& out_path,
                    bool strict) {
  RoadNetwork net = RoadNetwork::load_file(network_path);
  TrajectoryLoad load = load_trajectories_file(traj_path, net, strict);
  for (const auto& rej : load.rejected) {
    log_info("rejected line " + std::to_string(rej.line) + ": " + rej.reason);
  }
  StatsStore store =
      build_stats(load.trajectories, g.slots, g.alpha, g.delta, g.utc_offset);
  store.save_file(out_path, net);
  log_info("stats over " + std::to_string(store.group_count()) + " groups");
}

// ---------------------------------------------------------------------------
// pretrain / train

struct PretrainOpts {
  std::string network, trajectories, stats, out, embeddings;
  std::size_t count = 200;
  std::size_t epochs = 5;
  std::size_t policy_epochs = 0;
  bool policy_sgd = false;
};

void cmd_pretrain(const GlobalOpts& g, const PretrainOpts& opts) {
  RoadNetwork net = RoadNetwork::load_file(opts.network);
  StatsStore store = load_stats_file(opts.stats, net);
  TrajectoryLoad load = load_trajectories_file(opts.trajectories, net);

  ModelState model = ModelState::init(model_config_from(g, net.segment_count()));
  if (opts.policy_sgd) {
    AdamConfig c = model.opt_policy.config();
    c.adaptive = false;
    model.opt_policy.restore(0, c);
  }
  if (!opts.embeddings.empty()) {
    std::ifstream in(opts.embeddings);
    if (!in) throw io_error("cannot open embedding file '" + opts.embeddings + "'");
    const std::size_t loaded = load_embeddings(model.rsr, net, in);
    log_info("loaded " + std::to_string(loaded) + " external embeddings");
  }

  PretrainConfig cfg;
  cfg.sample_count = opts.count;
  cfg.epochs = opts.epochs;
  cfg.policy_epochs = opts.policy_epochs;
  cfg.seed = g.seed;
  pretrain(model.rsr, model.policy, model.opt_rsr, model.opt_policy, net, store,
           load.trajectories, cfg);
  save_model_file(opts.out, model);
  log_info("pretrained on " + std::to_string(std::min(opts.count,
                                                      load.trajectories.size())) +
           " trajectories");
}

struct TrainOpts {
  std::string network, trajectories, stats, model, out, eval_trajs, log_path;
  std::size_t train_count = 2000;
  std::size_t epochs_per_traj = 5;
  std::size_t eval_every = 200;
};

void cmd_train(const GlobalOpts& g, const TrainOpts& opts) {
  RoadNetwork net = RoadNetwork::load_file(opts.network);
  StatsStore store = load_stats_file(opts.stats, net);
  TrajectoryLoad corpus = load_trajectories_file(opts.trajectories, net);
  ModelState model = load_model_file(opts.model);
  if (model.config.vocab != net.segment_count()) {
    throw validation_error("model vocab does not match the network");
  }
  // explicit learning-rate flags override the checkpoint's optimizer config
  if (g.lr_rsr_set) {
    AdamConfig c = model.opt_rsr.config();
    c.lr = g.lr_rsr;
    model.opt_rsr.restore(model.opt_rsr.step_count(), c);
    model.config.lr_rsr = g.lr_rsr;
  }
  if (g.lr_asd_set) {
    AdamConfig c = model.opt_policy.config();
    c.lr = g.lr_asd;
    model.opt_policy.restore(model.opt_policy.step_count(), c);
    model.config.lr_asd = g.lr_asd;
  }

  std::vector<MapMatchedTrajectory> dev;
  if (!opts.eval_trajs.empty()) {
    dev = load_trajectories_file(opts.eval_trajs, net).trajectories;
  }

  std::vector<MapMatchedTrajectory> train = corpus.trajectories;
  if (train.size() > opts.train_count) {
    Rng rng = Rng::substream(g.seed, "train/sample");
    rng.shuffle(train);
    train.resize(opts.train_count);
  }

  TrainConfig cfg;
  cfg.epochs_per_traj = opts.epochs_per_traj;
  cfg.eval_every = opts.eval_every;
  cfg.delay = g.delay;
  cfg.seed = g.seed;
  TrainResult result = joint_train(model.rsr, model.policy, model.opt_rsr,
                                   model.opt_policy, net, store, train, dev, cfg);
  save_model_file(opts.out, model);
  if (!opts.log_path.empty()) {
    std::ostringstream log;
    for (const auto& line : result.log_lines) log << line << "\n";
    write_text_file(opts.log_path, log.str());
  }
  log_info("joint training: best dev F1 " + std::to_string(result.best_f1));
}

// ---------------------------------------------------------------------------
// detect

struct DetectOpts {
  std::string network, stats, model, trajectories, out;
  bool stream = false;
  bool baseline = false;
};

// Transition-frequency ablation baseline over a corpus file.
void detect_baseline_mode(const DetectOpts& opts, const RoadNetwork& net,
                          const StatsStore& store) {
  TrajectoryLoad corpus = load_trajectories_file(opts.trajectories, net);
  std::ostringstream out;
  for (const auto& traj : corpus.trajectories) {
    DetectionResult res = detect_frequency_baseline(store, net, traj);
    for (const auto& ev : res.events) out << event_to_json(ev).dump() << "\n";
  }
  if (opts.out.empty()) {
    std::cout << out.str();
  } else {
    write_text_file(opts.out, out.str());
  }
}

void detect_file_mode(const GlobalOpts& g, const DetectOpts& opts,
                      const RoadNetwork& net, const StatsStore& store,
                      const ModelState& model) {
  TrajectoryLoad corpus = load_trajectories_file(opts.trajectories, net);
  SessionConfig cfg;
  cfg.delay = g.delay;
  cfg.mode = parse_mode(g.mode);
  CorpusDetection detection =
      detect_corpus(net, store, model, corpus.trajectories, cfg, g.seed);

  std::ostringstream out;
  for (const auto& res : detection.results) {
    for (const auto& ev : res.events) out << event_to_json(ev).dump() << "\n";
  }
  if (opts.out.empty()) {
    std::cout << out.str();
  } else {
    write_text_file(opts.out, out.str());
  }
  log_info("detected over " + std::to_string(corpus.trajectories.size()) +
           " trajectories (" + std::to_string(detection.cold_start_count) +
           " cold starts)");
}

// Streaming protocol: one JSON command per stdin line,
//   {"open": {"traj": id, "sd": [src,dst], "start": epoch}}
//   {"point": {"traj": id, "seg": id, "last": bool}}
// Events stream to stdout as they become final. Any protocol violation is
// fatal: single-line JSON error on stderr, nonzero exit.
void detect_stream_mode(const GlobalOpts& g, const RoadNetwork& net,
                        const StatsStore& store, const ModelState& model) {
  std::map<std::string, DetectionSession> sessions;
  SessionConfig base;
  base.delay = g.delay;
  base.mode = parse_mode(g.mode);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(std::cin, line)) {
    ++line_no;
    if (line.empty()) continue;
    json cmd;
    try {
      cmd = json::parse(line);
    } catch (const json::parse_error& e) {
      throw stream_error("line " + std::to_string(line_no) + ": " + e.what());
    }

    if (cmd.contains("open")) {
      const json& o = cmd.at("open");
      const std::string id = o.at("traj").get<std::string>();
      if (sessions.contains(id)) {
        throw stream_error("trajectory '" + id + "' is already open");
      }
      const auto& sd = o.at("sd");
      if (!sd.is_array() || sd.size() != 2) {
        throw stream_error("open.sd must be [source, destination]");
      }
      SdPair pair{net.require_segment(sd[0].get<std::string>()),
                  net.require_segment(sd[1].get<std::string>())};
      SessionConfig cfg = base;
      cfg.seed = Rng::substream(g.seed, "detect/" + id).next_u64();
      sessions.emplace(id,
                       DetectionSession(net, store, model.rsr, model.policy, id, pair,
                                        o.at("start").get<std::int64_t>(), cfg));
    } else if (cmd.contains("point")) {
      const json& p = cmd.at("point");
      const std::string id = p.at("traj").get<std::string>();
      auto it = sessions.find(id);
      if (it == sessions.end()) {
        throw stream_error("point for unknown trajectory '" + id + "'");
      }
      const SegIdx seg = net.require_segment(p.at("seg").get<std::string>());
      const bool last = p.value("last", false);
      for (const auto& ev : it->second.push_point(seg, last)) {
        std::cout << event_to_json(ev).dump() << "\n" << std::flush;
      }
      if (last) sessions.erase(it);
    } else {
      throw stream_error("line " + std::to_string(line_no) +
                         ": expected an open or point command");
    }
  }
  if (!sessions.empty()) {
    throw stream_error(std::to_string(sessions.size()) +
                       " trajectories left open at end of input");
  }
}

void cmd_detect(const GlobalOpts& g, const DetectOpts& opts) {
  RoadNetwork net = RoadNetwork::load_file(opts.network);
  StatsStore store = load_stats_file(opts.stats, net);
  if (opts.baseline) {
    if (opts.trajectories.empty()) {
      throw config_error("baseline detection needs --trajectories");
    }
    detect_baseline_mode(opts, net, store);
    return;
  }
  if (opts.model.empty()) {
    throw config_error("detect needs --model (or --baseline)");
  }
  ModelState model = load_model_file(opts.model);
  if (opts.stream) {
    detect_stream_mode(g, net, store, model);
  } else {
    if (opts.trajectories.empty()) {
      throw config_error("detect needs --trajectories or --stream");
    }
    detect_file_mode(g, opts, net, store, model);
  }
}

// ---------------------------------------------------------------------------
// eval

void cmd_eval(const GlobalOpts& g, const std::string& network_path,
              const std::string& gt_path, const std::string& events_path,
              const std::string& out_path) {
  RoadNetwork net = RoadNetwork::load_file(network_path);
  TrajectoryLoad gt = load_trajectories_file(gt_path, net);

  std::map<std::string, std::size_t> index;
  LabeledCorpus corpus;
  for (const auto& t : gt.trajectories) {
    if (!t.gt_labels) {
      throw validation_error("trajectory '" + t.id + "' lacks labels");
    }
    index[t.id] = corpus.size();
    corpus.push_back({t.id, *t.gt_labels,
                      std::vector<std::uint8_t>(t.segments.size(), 0)});
  }

  std::istringstream events(read_text_file(events_path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(events, line)) {
    ++line_no;
    if (line.empty()) continue;
    json ev;
    try {
      ev = json::parse(line);
    } catch (const json::parse_error& e) {
      throw parse_error("events line " + std::to_string(line_no) + ": " + e.what());
    }
    if (ev.value("event", "") != "anomaly") continue;
    auto it = index.find(ev.at("traj").get<std::string>());
    if (it == index.end()) {
      throw validation_error("events reference unknown trajectory '" +
                             ev.at("traj").get<std::string>() + "'");
    }
    auto& detected = corpus[it->second].detected;
    const std::size_t start = ev.at("start_idx").get<std::size_t>();
    const std::size_t end = ev.at("end_idx").get<std::size_t>();
    if (end >= detected.size() || start > end) {
      throw validation_error("events line " + std::to_string(line_no) +
                             ": span out of range");
    }
    for (std::size_t i = start; i <= end; ++i) detected[i] = 1;
  }

  EvalReport report = evaluate(corpus, g.phi);
  json out = report_to_json(report);
  if (!out_path.empty()) write_text_file(out_path, out.dump(2) + "\n");

  std::cout << "trajectories    " << corpus.size() << "\n"
            << "gt runs         " << report.gt_runs << "\n"
            << "detected runs   " << report.detected_runs << "\n"
            << "precision       " << report.precision << "\n"
            << "recall          " << report.recall << "\n"
            << "f1              " << report.f1 << "\n"
            << "tf1 (phi=" << report.phi << ") " << report.tf1 << "\n";
}

// ---------------------------------------------------------------------------
// drift

struct DriftCmdOpts {
  std::string network, trajectories, out;
  std::size_t pretrain_count = 200;
  std::size_t policy_epochs = 0;
  std::size_t train_count = 1000;
  std::size_t epochs = 5;
  std::size_t dev_count = 200;
  double joint_lr_asd = 1e-4;
};

void cmd_drift(const GlobalOpts& g, const DriftCmdOpts& opts) {
  if (g.xi < 1) throw config_error("xi must be at least 1");
  RoadNetwork net = RoadNetwork::load_file(opts.network);
  TrajectoryLoad corpus = load_trajectories_file(opts.trajectories, net);

  std::vector<MapMatchedTrajectory> sorted = corpus.trajectories;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) {
                     return a.start_time < b.start_time;
                   });
  const std::size_t per_part = sorted.size() / g.xi;
  if (per_part == 0) throw config_error("not enough trajectories for xi parts");

  std::vector<std::vector<MapMatchedTrajectory>> parts;
  for (std::size_t p = 0; p < g.xi; ++p) {
    const std::size_t begin = p * per_part;
    const std::size_t end = p + 1 == g.xi ? sorted.size() : begin + per_part;
    parts.emplace_back(sorted.begin() + begin, sorted.begin() + end);
  }

  // per part: a labeled dev slice guides checkpoint selection, the rest
  // feeds training
  auto carve = [&](const std::vector<MapMatchedTrajectory>& part,
                   std::uint64_t salt) {
    std::vector<MapMatchedTrajectory> pool = part;
    Rng rng = Rng::substream(g.seed, "drift/sample" + std::to_string(salt));
    rng.shuffle(pool);
    const std::size_t n_dev = std::min(opts.dev_count, pool.size() / 5);
    std::vector<MapMatchedTrajectory> dev(pool.begin(), pool.begin() + n_dev);
    pool.erase(pool.begin(), pool.begin() + n_dev);
    if (pool.size() > opts.train_count) pool.resize(opts.train_count);
    return std::make_pair(std::move(pool), std::move(dev));
  };

  auto gentle_policy_lr = [&](ModelState& m) {
    AdamConfig c = m.opt_policy.config();
    c.lr = opts.joint_lr_asd;
    m.opt_policy.restore(m.opt_policy.step_count(), c);
  };

  // frozen model: trained on part 1 only, with part-1 statistics
  StatsStore store1 = build_stats(parts[0], g.slots, g.alpha, g.delta, g.utc_offset);
  ModelState frozen = ModelState::init(model_config_from(g, net.segment_count()));
  {
    PretrainConfig pcfg;
    pcfg.sample_count = opts.pretrain_count;
    pcfg.epochs = opts.epochs;
    pcfg.policy_epochs = opts.policy_epochs;
    pcfg.seed = g.seed;
    pretrain(frozen.rsr, frozen.policy, frozen.opt_rsr, frozen.opt_policy, net, store1,
             parts[0], pcfg);
    gentle_policy_lr(frozen);
    auto [pool, dev] = carve(parts[0], 0);
    TrainConfig tcfg;
    tcfg.epochs_per_traj = opts.epochs;
    tcfg.eval_every = 100;
    tcfg.delay = g.delay;
    tcfg.seed = g.seed;
    joint_train(frozen.rsr, frozen.policy, frozen.opt_rsr, frozen.opt_policy, net,
                store1, pool, dev, tcfg);
  }

  ModelState tuned = frozen;  // fine-tuning continues from the part-1 model
  SessionConfig scfg;
  scfg.delay = g.delay;
  scfg.mode = Mode::Greedy;

  json rows = json::array();
  for (std::size_t p = 0; p < parts.size(); ++p) {
    StatsStore store_p =
        p == 0 ? store1
               : build_stats(parts[p], g.slots, g.alpha, g.delta, g.utc_offset);

    if (p > 0) {
      auto [pool, dev] = carve(parts[p], p);
      TrainConfig tcfg;
      tcfg.epochs_per_traj = opts.epochs;
      tcfg.eval_every = 100;
      tcfg.delay = g.delay;
      tcfg.seed = g.seed + p;
      fine_tune(tuned.rsr, tuned.policy, tuned.opt_rsr, tuned.opt_policy, net, store_p,
                pool, dev, tcfg);
    }

    EvalReport frozen_rep =
        evaluate_detection(net, store1, frozen, parts[p], scfg, g.seed, g.phi);
    EvalReport tuned_rep =
        evaluate_detection(net, store_p, tuned, parts[p], scfg, g.seed, g.phi);
    rows.push_back({{"part", p + 1},
                    {"trajectories", parts[p].size()},
                    {"frozen_f1", frozen_rep.f1},
                    {"finetuned_f1", tuned_rep.f1}});
    log_info("part " + std::to_string(p + 1) + ": frozen " +
             std::to_string(frozen_rep.f1) + " finetuned " +
             std::to_string(tuned_rep.f1));
  }

  json out;
  out["xi"] = g.xi;
  out["parts"] = std::move(rows);
  if (!opts.out.empty()) write_text_file(opts.out, out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// coldstart

struct ColdstartOpts {
  std::string network, stats, model, test, out;
};

void cmd_coldstart(const GlobalOpts& g, const ColdstartOpts& opts) {
  RoadNetwork net = RoadNetwork::load_file(opts.network);
  StatsStore store = load_stats_file(opts.stats, net);
  ModelState model = load_model_file(opts.model);
  TrajectoryLoad test = load_trajectories_file(opts.test, net);

  SessionConfig scfg;
  scfg.delay = g.delay;
  scfg.mode = Mode::Greedy;

  json rows = json::array();
  for (double rate : g.drop_rates) {
    StatsStore dropped =
        rate == 0.0 ? store
                    : drop_history(store, rate,
                                   Rng::substream(g.seed, "coldstart").next_u64());
    EvalReport rep = evaluate_detection(net, dropped, model, test.trajectories, scfg,
                                        g.seed, g.phi);
    rows.push_back({{"drop_rate", rate},
                    {"groups", dropped.group_count()},
                    {"precision", rep.precision},
                    {"recall", rep.recall},
                    {"f1", rep.f1},
                    {"tf1", rep.tf1}});
    log_info("drop rate " + std::to_string(rate) + ": F1 " + std::to_string(rep.f1));
  }

  json out;
  out["rows"] = std::move(rows);
  if (!opts.out.empty()) write_text_file(opts.out, out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// bench

struct BenchOpts {
  std::string network, stats, model, trajectories, out;
};

// Length groups follow the evaluation grouping: G1 < 15 <= G2 < 30 <= G3
// < 45 <= G4.
std::size_t length_group(std::size_t n) {
  if (n < 15) return 0;
  if (n < 30) return 1;
  if (n < 45) return 2;
  return 3;
}

json latency_summary(std::vector<double>& micros) {
  std::sort(micros.begin(), micros.end());
  auto at = [&](double q) {
    if (micros.empty()) return 0.0;
    const auto idx = static_cast<std::size_t>(q * (micros.size() - 1));
    return micros[idx];
  };
  return {{"points", micros.size()},
          {"median_us", at(0.5)},
          {"p99_us", at(0.99)}};
}

void cmd_bench(const GlobalOpts& g, const BenchOpts& opts) {
  RoadNetwork net = RoadNetwork::load_file(opts.network);
  StatsStore store = load_stats_file(opts.stats, net);
  ModelState model = load_model_file(opts.model);
  TrajectoryLoad corpus = load_trajectories_file(opts.trajectories, net);

  SessionConfig cfg;
  cfg.delay = g.delay;
  cfg.mode = Mode::Greedy;

  // warmup pass
  for (std::size_t i = 0; i < std::min<std::size_t>(corpus.trajectories.size(), 50);
       ++i) {
    detect_trajectory(net, store, model.rsr, model.policy, corpus.trajectories[i], cfg);
  }

  std::vector<std::vector<double>> micros(4);
  std::vector<double> all;
  using clock = std::chrono::steady_clock;
  for (const auto& traj : corpus.trajectories) {
    const std::size_t group = length_group(traj.length());
    DetectionSession session(net, store, model.rsr, model.policy, traj.id, traj.sd(),
                             traj.start_time, cfg);
    for (std::size_t i = 0; i < traj.length(); ++i) {
      const auto t0 = clock::now();
      session.push_point(traj.segments[i], i == traj.length() - 1);
      const auto t1 = clock::now();
      const double us =
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count() /
          1000.0;
      micros[group].push_back(us);
      all.push_back(us);
    }
  }

  json out;
  out["overall"] = latency_summary(all);
  const char* names[] = {"G1", "G2", "G3", "G4"};
  for (std::size_t i = 0; i < 4; ++i) {
    out[names[i]] = latency_summary(micros[i]);
  }
  if (!opts.out.empty()) write_text_file(opts.out, out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOpts g;
  CLI::App app{"online anomalous-subtrajectory detection on road networks"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  try {
    apply_config_file(g, argc, argv);
  } catch (const Error& e) {
    std::cerr << json({{"code", e.code()}, {"message", e.what()}}).dump() << "\n";
    return 1;
  }
  add_global_flags(app, g);

  GenOpts gen;
  auto* sc_gen = app.add_subcommand("gen", "generate a synthetic world");
  sc_gen->add_option("--out", gen.out_dir, "output directory")->required();
  sc_gen->add_option("--grid-width", gen.synth.grid_width);
  sc_gen->add_option("--grid-height", gen.synth.grid_height);
  sc_gen->add_option("--pairs", gen.synth.sd_pairs);
  sc_gen->add_option("--trajs-per-pair", gen.synth.trajs_per_pair);
  sc_gen->add_option("--anomaly-ratio", gen.synth.anomaly_ratio);
  sc_gen->add_option("--detour-min", gen.synth.detour_min);
  sc_gen->add_option("--detour-max", gen.synth.detour_max);
  sc_gen->add_option("--min-dist", gen.synth.min_sd_dist);
  sc_gen->add_option("--max-dist", gen.synth.max_sd_dist);
  sc_gen->add_option("--corridor", gen.synth.corridor_edges);
  sc_gen->add_option("--corridor-length", gen.synth.corridor_length);
  sc_gen->add_option("--slots-used", gen.synth.slots_used)->delimiter(',');
  sc_gen->add_option("--route-count-weights", gen.synth.route_count_weights)
      ->delimiter(',');
  sc_gen->add_option("--recurring-share", gen.synth.recurring_share,
                     "share of anomalies reusing the pair's recurring detour");
  sc_gen->add_option("--holdout-eval", gen.holdout_eval, "eval holdout per pair");
  sc_gen->add_option("--holdout-test", gen.holdout_test, "test holdout per pair");
  sc_gen->add_option("--holdout-train", gen.holdout_train,
                     "training pool per pair, carved from the history");
  sc_gen->add_flag("--drift", gen.drift, "emit the concept-drift swap scenario");

  std::string pp_network, pp_trajs, pp_out;
  bool pp_strict = false;
  auto* sc_pre = app.add_subcommand("preprocess", "build group statistics");
  sc_pre->add_option("--network", pp_network)->required();
  sc_pre->add_option("--trajectories", pp_trajs)->required();
  sc_pre->add_option("--out", pp_out)->required();
  sc_pre->add_flag("--strict", pp_strict, "fail on the first invalid record");

  PretrainOpts pre;
  auto* sc_pretrain = app.add_subcommand("pretrain", "warm-start both networks");
  sc_pretrain->add_option("--network", pre.network)->required();
  sc_pretrain->add_option("--trajectories", pre.trajectories)->required();
  sc_pretrain->add_option("--stats", pre.stats)->required();
  sc_pretrain->add_option("--out", pre.out)->required();
  sc_pretrain->add_option("--count", pre.count, "pretraining sample size");
  sc_pretrain->add_option("--epochs", pre.epochs);
  sc_pretrain->add_option("--policy-epochs", pre.policy_epochs,
                          "policy passes (default: same as --epochs)");
  sc_pretrain->add_flag("--policy-sgd", pre.policy_sgd,
                        "plain gradient ascent for the policy instead of adam");
  sc_pretrain->add_option("--embeddings", pre.embeddings,
                          "optional segment embedding JSONL");

  TrainOpts tr;
  auto* sc_train = app.add_subcommand("train", "joint training loop");
  sc_train->add_option("--network", tr.network)->required();
  sc_train->add_option("--trajectories", tr.trajectories)->required();
  sc_train->add_option("--stats", tr.stats)->required();
  sc_train->add_option("--model", tr.model)->required();
  sc_train->add_option("--out", tr.out)->required();
  sc_train->add_option("--eval-trajectories", tr.eval_trajs,
                       "labeled dev set for best-model selection");
  sc_train->add_option("--log", tr.log_path, "training log JSONL");
  sc_train->add_option("--train-count", tr.train_count);
  sc_train->add_option("--epochs-per-traj", tr.epochs_per_traj);
  sc_train->add_option("--eval-every", tr.eval_every);

  DetectOpts det;
  auto* sc_detect = app.add_subcommand("detect", "online detection");
  sc_detect->add_option("--network", det.network)->required();
  sc_detect->add_option("--stats", det.stats)->required();
  sc_detect->add_option("--model", det.model);
  sc_detect->add_flag("--baseline", det.baseline,
                      "transition-frequency baseline (no model)");
  sc_detect->add_option("--trajectories", det.trajectories, "file mode input");
  sc_detect->add_option("--out", det.out, "events JSONL (default stdout)");
  sc_detect->add_flag("--stream", det.stream, "JSONL command protocol on stdin");

  std::string ev_network, ev_gt, ev_events, ev_out;
  auto* sc_eval = app.add_subcommand("eval", "score detections against labels");
  sc_eval->add_option("--network", ev_network)->required();
  sc_eval->add_option("--gt", ev_gt, "labeled trajectory JSONL")->required();
  sc_eval->add_option("--events", ev_events, "detector output JSONL")->required();
  sc_eval->add_option("--out", ev_out, "report JSON");

  DriftCmdOpts dr;
  auto* sc_drift = app.add_subcommand("drift", "frozen vs fine-tuned across parts");
  sc_drift->add_option("--network", dr.network)->required();
  sc_drift->add_option("--trajectories", dr.trajectories)->required();
  sc_drift->add_option("--out", dr.out);
  sc_drift->add_option("--pretrain-count", dr.pretrain_count);
  sc_drift->add_option("--policy-epochs", dr.policy_epochs);
  sc_drift->add_option("--train-count", dr.train_count);
  sc_drift->add_option("--epochs-per-traj", dr.epochs);
  sc_drift->add_option("--dev-count", dr.dev_count,
                       "labeled dev slice per part for checkpoint selection");
  sc_drift->add_option("--joint-lr-asd", dr.joint_lr_asd,
                       "policy learning rate for the joint/fine-tune phases");

  ColdstartOpts cs;
  auto* sc_cold = app.add_subcommand("coldstart", "F1 under history drop rates");
  sc_cold->add_option("--network", cs.network)->required();
  sc_cold->add_option("--stats", cs.stats)->required();
  sc_cold->add_option("--model", cs.model)->required();
  sc_cold->add_option("--test", cs.test, "labeled test JSONL")->required();
  sc_cold->add_option("--out", cs.out);

  BenchOpts be;
  auto* sc_bench = app.add_subcommand("bench", "per-point latency by length group");
  sc_bench->add_option("--network", be.network)->required();
  sc_bench->add_option("--stats", be.stats)->required();
  sc_bench->add_option("--model", be.model)->required();
  sc_bench->add_option("--trajectories", be.trajectories)->required();
  sc_bench->add_option("--out", be.out);

  try {
    app.parse(argc, argv);
    g.lr_rsr_set = app.count("--lr-rsr") > 0;
    g.lr_asd_set = app.count("--lr-asd") > 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    std::cerr << json({{"code", "usage"}, {"message", e.what()}}).dump() << "\n";
    return 2;
  }

  try {
    if (sc_gen->parsed()) cmd_gen(g, gen);
    if (sc_pre->parsed()) cmd_preprocess(g, pp_network, pp_trajs, pp_out, pp_strict);
    if (sc_pretrain->parsed()) cmd_pretrain(g, pre);
    if (sc_train->parsed()) cmd_train(g, tr);
    if (sc_detect->parsed()) cmd_detect(g, det);
    if (sc_eval->parsed()) cmd_eval(g, ev_network, ev_gt, ev_events, ev_out);
    if (sc_drift->parsed()) cmd_drift(g, dr);
    if (sc_cold->parsed()) cmd_coldstart(g, cs);
    if (sc_bench->parsed()) cmd_bench(g, be);
  } catch (const Error& e) {
    std::cerr << json({{"code", e.code()}, {"message", e.what()}}).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json({{"code", "internal"}, {"message", e.what()}}).dump() << "\n";
    return 1;
  }
  return 0;
}
