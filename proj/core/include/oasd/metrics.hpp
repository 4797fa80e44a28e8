#ifndef OASD_METRICS_HPP
#define OASD_METRICS_HPP

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oasd {

// Ground-truth and detected label sequences for one trajectory; equal
// lengths, binary labels, endpoints normal.
struct TrajectoryLabels {
  std::string id;
  std::vector<std::uint8_t> gt;
  std::vector<std::uint8_t> detected;
};

using LabeledCorpus = std::vector<TrajectoryLabels>;

struct EvalReport {
  double jaccard_sum = 0.0;  // J, summed over gt-anomalous trajectories
  double precision = 0.0;    // J / |C_o|
  double recall = 0.0;       // J / |C_g|
  double f1 = 0.0;
  double tf1 = 0.0;  // with each trajectory Jaccard thresholded at phi
  std::size_t gt_runs = 0;        // |C_g|
  std::size_t detected_runs = 0;  // |C_o|
  double phi = 0.5;
  std::vector<std::pair<std::string, double>> per_traj_jaccard;
};

// |a intersect b| / |a union b|; 0 when the union is empty.
double jaccard(const std::set<std::size_t>& gt_set, const std::set<std::size_t>& det_set);

// Maximal runs of 1s in a label sequence, as [start, end] inclusive.
std::vector<std::pair<std::size_t, std::size_t>> label_runs(
    const std::vector<std::uint8_t>& labels);

// Span-level scoring adapted from NER evaluation: trajectory-level Jaccard
// over 1-positions for trajectories with ground-truth anomalies, precision
// and recall against the maximal-run counts, and the thresholded TF1
// variant. Trajectories without ground-truth anomalies contribute only
// false-positive runs to |C_o|.
EvalReport evaluate(const LabeledCorpus& corpus, double phi = 0.5);

}  // namespace oasd

#endif  // OASD_METRICS_HPP
