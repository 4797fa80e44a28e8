#include "oasd/metrics.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "oasd/error.hpp"

namespace oasd {

double jaccard(const std::set<std::size_t>& gt_set, const std::set<std::size_t>& det_set) {
  if (gt_set.empty() && det_set.empty()) return 0.0;
  std::size_t inter = 0;
  for (std::size_t p : gt_set) inter += det_set.count(p);
  const std::size_t uni = gt_set.size() + det_set.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::pair<std::size_t, std::size_t>> label_runs(
    const std::vector<std::uint8_t>& labels) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i] == 0) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < labels.size() && labels[i] != 0) ++i;
    runs.emplace_back(start, i - 1);
  }
  return runs;
}

namespace {

std::set<std::size_t> one_positions(const std::vector<std::uint8_t>& labels) {
  std::set<std::size_t> s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0) s.insert(i);
  }
  return s;
}

void validate(const TrajectoryLabels& t) {
  if (t.gt.size() != t.detected.size()) {
    throw validation_error(fmt::format(
        "trajectory '{}': gt length {} != detected length {}", t.id, t.gt.size(),
        t.detected.size()));
  }
  if (t.gt.empty()) {
    throw validation_error(fmt::format("trajectory '{}': empty label sequence", t.id));
  }
  for (std::uint8_t l : t.gt) {
    if (l > 1) throw validation_error(fmt::format("trajectory '{}': gt label not 0/1", t.id));
  }
  for (std::uint8_t l : t.detected) {
    if (l > 1) {
      throw validation_error(fmt::format("trajectory '{}': detected label not 0/1", t.id));
    }
  }
  if (t.gt.front() != 0 || t.gt.back() != 0 || t.detected.front() != 0 ||
      t.detected.back() != 0) {
    throw validation_error(
        fmt::format("trajectory '{}': endpoint labels must be 0", t.id));
  }
}

double f1_of(double p, double r) { return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

EvalReport evaluate(const LabeledCorpus& corpus, double phi) {
  EvalReport report;
  report.phi = phi;

  double thresholded_sum = 0.0;
  for (const TrajectoryLabels& t : corpus) {
    validate(t);
    report.gt_runs += label_runs(t.gt).size();
    report.detected_runs += label_runs(t.detected).size();

    const std::set<std::size_t> gt_set = one_positions(t.gt);
    if (gt_set.empty()) continue;  // contributes only to |C_o|
    const double j = jaccard(gt_set, one_positions(t.detected));
    report.jaccard_sum += j;
    thresholded_sum += j > phi ? 1.0 : 0.0;
    report.per_traj_jaccard.emplace_back(t.id, j);
  }

  const auto ratio = [](double num, std::size_t den) {
    return den > 0 ? num / static_cast<double>(den) : 0.0;
  };
  report.precision = ratio(report.jaccard_sum, report.detected_runs);
  report.recall = ratio(report.jaccard_sum, report.gt_runs);
  report.f1 = f1_of(report.precision, report.recall);
  report.tf1 = f1_of(ratio(thresholded_sum, report.detected_runs),
                     ratio(thresholded_sum, report.gt_runs));
  return report;
}

}  // namespace oasd
