#include "pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "oasd/error.hpp"
#include "oasd/rng.hpp"

namespace oasd::cli {

using nlohmann::json;

namespace {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("OASD_LOG");
    if (env == nullptr) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

}  // namespace

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[oasd] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[oasd] " << msg << "\n";
}

json event_to_json(const DetectionEvent& ev) {
  json j;
  j["traj"] = ev.traj_id;
  switch (ev.kind) {
    case EventKind::Anomaly:
      j["event"] = "anomaly";
      j["start_idx"] = ev.start_idx;
      j["end_idx"] = ev.end_idx;
      j["segments"] = ev.segments;
      break;
    case EventKind::Normal:
      j["event"] = "normal";
      break;
    case EventKind::Warning:
      j["event"] = "warning";
      j["message"] = ev.message;
      break;
  }
  return j;
}

CorpusDetection detect_corpus(const RoadNetwork& net, const StatsStore& store,
                              const ModelState& model,
                              const std::vector<MapMatchedTrajectory>& trajs,
                              const SessionConfig& base_cfg, std::uint64_t seed) {
  CorpusDetection out;
  out.results.reserve(trajs.size());
  for (const auto& traj : trajs) {
    SessionConfig cfg = base_cfg;
    cfg.seed = Rng::substream(seed, "detect/" + traj.id).next_u64();
    out.results.push_back(
        detect_trajectory(net, store, model.rsr, model.policy, traj, cfg));
    if (out.results.back().cold_start) ++out.cold_start_count;
  }
  return out;
}

LabeledCorpus to_labeled_corpus(const std::vector<MapMatchedTrajectory>& trajs,
                                const std::vector<DetectionResult>& results) {
  LabeledCorpus corpus;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    if (!trajs[i].gt_labels) {
      throw validation_error("trajectory '" + trajs[i].id +
                             "' lacks ground-truth labels required for evaluation");
    }
    corpus.push_back({trajs[i].id, *trajs[i].gt_labels, results[i].labels});
  }
  return corpus;
}

EvalReport evaluate_detection(const RoadNetwork& net, const StatsStore& store,
                              const ModelState& model,
                              const std::vector<MapMatchedTrajectory>& trajs,
                              const SessionConfig& cfg, std::uint64_t seed,
                              double phi) {
  CorpusDetection detection = detect_corpus(net, store, model, trajs, cfg, seed);
  return evaluate(to_labeled_corpus(trajs, detection.results), phi);
}

json report_to_json(const EvalReport& report) {
  json j;
  j["jaccard_sum"] = report.jaccard_sum;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["tf1"] = report.tf1;
  j["gt_runs"] = report.gt_runs;
  j["detected_runs"] = report.detected_runs;
  j["phi"] = report.phi;
  j["trajectories_scored"] = report.per_traj_jaccard.size();
  nlohmann::json per = nlohmann::json::array();
  for (const auto& [id, value] : report.per_traj_jaccard) {
    per.push_back({{"traj", id}, {"jaccard", value}});
  }
  j["per_trajectory_jaccard"] = std::move(per);
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write '" + path + "'");
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SplitCorpus split_corpus(const std::vector<MapMatchedTrajectory>& trajs,
                         std::size_t eval_per_group, std::size_t test_per_group,
                         std::uint64_t seed, std::size_t train_per_group) {
  std::map<std::pair<SegIdx, SegIdx>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    groups[{trajs[i].segments.front(), trajs[i].segments.back()}].push_back(i);
  }

  SplitCorpus split;
  std::size_t gi = 0;
  for (auto& [key, members] : groups) {
    Rng rng = Rng::substream(seed, "split/" + std::to_string(gi++));
    rng.shuffle(members);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto& t = trajs[members[k]];
      if (k < test_per_group) {
        split.test.push_back(t);
      } else if (k < test_per_group + eval_per_group) {
        split.eval.push_back(t);
      } else {
        if (k < test_per_group + eval_per_group + train_per_group) {
          split.train.push_back(t);
        }
        split.rest.push_back(t);
      }
    }
  }
  return split;
}

}  // namespace oasd::cli
