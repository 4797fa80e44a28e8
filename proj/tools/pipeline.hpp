// Shared plumbing for the oasd CLI commands: corpus handling, detection
// loops, report assembly.
#ifndef OASD_TOOLS_PIPELINE_HPP
#define OASD_TOOLS_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oasd/checkpoint.hpp"
#include "oasd/detector.hpp"
#include "oasd/groupstats.hpp"
#include "oasd/metrics.hpp"
#include "oasd/roadnet.hpp"
#include "oasd/trajio.hpp"

namespace oasd::cli {

// OASD_LOG=debug|info controls verbosity; default prints warnings only.
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

nlohmann::json event_to_json(const DetectionEvent& ev);

// Runs greedy detection over a corpus and returns per-trajectory events
// plus final labels keyed by trajectory order.
struct CorpusDetection {
  std::vector<DetectionResult> results;
  std::size_t cold_start_count = 0;
};

CorpusDetection detect_corpus(const RoadNetwork& net, const StatsStore& store,
                              const ModelState& model,
                              const std::vector<MapMatchedTrajectory>& trajs,
                              const SessionConfig& base_cfg, std::uint64_t seed);

// Labels from detection results against the corpus ground truth.
LabeledCorpus to_labeled_corpus(const std::vector<MapMatchedTrajectory>& trajs,
                                const std::vector<DetectionResult>& results);

EvalReport evaluate_detection(const RoadNetwork& net, const StatsStore& store,
                              const ModelState& model,
                              const std::vector<MapMatchedTrajectory>& trajs,
                              const SessionConfig& cfg, std::uint64_t seed,
                              double phi);

nlohmann::json report_to_json(const EvalReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Deterministic per-pair holdout split: every trajectory lands in exactly
// one of (rest, eval, test) based on a seeded shuffle within its SD group.
struct SplitCorpus {
  std::vector<MapMatchedTrajectory> rest;
  std::vector<MapMatchedTrajectory> eval;
  std::vector<MapMatchedTrajectory> test;
  // optional training pool carved out of rest (rest keeps its members, so
  // history statistics still cover them)
  std::vector<MapMatchedTrajectory> train;
};

SplitCorpus split_corpus(const std::vector<MapMatchedTrajectory>& trajs,
                         std::size_t eval_per_group, std::size_t test_per_group,
                         std::uint64_t seed, std::size_t train_per_group = 0);

}  // namespace oasd::cli

#endif  // OASD_TOOLS_PIPELINE_HPP
