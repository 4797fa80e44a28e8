#include <doctest.h>

#include "metrics_reference.hpp"
#include "oasd/error.hpp"
#include "oasd/metrics.hpp"
#include "oasd/rng.hpp"

using namespace oasd;
using oasd::test::reference_evaluate;

namespace {

std::vector<std::uint8_t> random_labels(std::size_t n, double p_one, Rng& rng) {
  std::vector<std::uint8_t> labels(n, 0);
  for (std::size_t i = 1; i + 1 < n; ++i) labels[i] = rng.bernoulli(p_one) ? 1 : 0;
  return labels;
}

}  // namespace

TEST_CASE("jaccard basics") {
  std::set<std::size_t> gt{3, 4, 5};
  CHECK(jaccard(gt, {3, 4, 5}) == doctest::Approx(1.0));
  CHECK(jaccard(gt, {4, 5}) == doctest::Approx(2.0 / 3.0));
  CHECK(jaccard(gt, {}) == doctest::Approx(0.0));
  CHECK(jaccard({}, {}) == 0.0);
}

TEST_CASE("label runs") {
  CHECK(label_runs({0, 1, 1, 0, 1, 0}).size() == 2);
  CHECK(label_runs({0, 0, 0}).empty());
  auto runs = label_runs({0, 1, 1, 0, 1, 0});
  CHECK(runs[0] == std::pair<std::size_t, std::size_t>{1, 2});
  CHECK(runs[1] == std::pair<std::size_t, std::size_t>{4, 4});
}

TEST_CASE("perfect detection scores one everywhere") {
  LabeledCorpus corpus;
  corpus.push_back({"a", {0, 1, 1, 0, 0}, {0, 1, 1, 0, 0}});
  corpus.push_back({"b", {0, 0, 1, 1, 0}, {0, 0, 1, 1, 0}});
  auto rep = evaluate(corpus);
  CHECK(rep.precision == doctest::Approx(1.0));
  CHECK(rep.recall == doctest::Approx(1.0));
  CHECK(rep.f1 == doctest::Approx(1.0));
  CHECK(rep.tf1 == doctest::Approx(1.0));
}

TEST_CASE("fragmented detection: the worked example") {
  // gt run {3,4,5}; detector finds {3} and {5} as two fragments
  LabeledCorpus corpus;
  corpus.push_back({"a", {0, 0, 0, 1, 1, 1, 0}, {0, 0, 0, 1, 0, 1, 0}});
  auto rep = evaluate(corpus, 0.5);
  CHECK(rep.jaccard_sum == doctest::Approx(2.0 / 3.0));
  CHECK(rep.gt_runs == 1);
  CHECK(rep.detected_runs == 2);
  CHECK(rep.precision == doctest::Approx(1.0 / 3.0));
  CHECK(rep.recall == doctest::Approx(2.0 / 3.0));
  CHECK(rep.f1 == doctest::Approx(4.0 / 9.0));
  // thresholded: 2/3 > 0.5 counts as a full hit
  CHECK(rep.tf1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("silent detector scores zero recall") {
  LabeledCorpus corpus;
  corpus.push_back({"a", {0, 1, 1, 0}, {0, 0, 0, 0}});
  auto rep = evaluate(corpus);
  CHECK(rep.recall == 0.0);
  CHECK(rep.f1 == 0.0);
}

TEST_CASE("false positives on normal trajectories dilute precision only") {
  LabeledCorpus corpus;
  corpus.push_back({"anom", {0, 1, 1, 0}, {0, 1, 1, 0}});
  corpus.push_back({"norm", {0, 0, 0, 0}, {0, 1, 0, 0}});
  auto rep = evaluate(corpus);
  CHECK(rep.gt_runs == 1);
  CHECK(rep.detected_runs == 2);
  CHECK(rep.recall == doctest::Approx(1.0));
  CHECK(rep.precision == doctest::Approx(0.5));
}

TEST_CASE("mismatched lengths name the trajectory") {
  LabeledCorpus corpus;
  corpus.push_back({"broken", {0, 1, 0}, {0, 0}});
  CHECK_THROWS_WITH_AS(evaluate(corpus), doctest::Contains("broken"), Error);
}

TEST_CASE("evaluate equals the reference on random corpora") {
  Rng rng(81);
  for (int trial = 0; trial < 200; ++trial) {
    LabeledCorpus corpus;
    const std::size_t n_traj = 1 + rng.below(20);
    for (std::size_t t = 0; t < n_traj; ++t) {
      const std::size_t n = 3 + rng.below(28);
      corpus.push_back({"t" + std::to_string(t), random_labels(n, 0.3, rng),
                        random_labels(n, 0.3, rng)});
    }
    const double phi = 0.5;
    auto rep = evaluate(corpus, phi);
    auto ref = reference_evaluate(corpus, phi);
    CHECK(rep.jaccard_sum == doctest::Approx(ref.j).epsilon(1e-12));
    CHECK(rep.gt_runs == ref.cg);
    CHECK(rep.detected_runs == ref.co);
    CHECK(rep.precision == doctest::Approx(ref.p).epsilon(1e-12));
    CHECK(rep.recall == doctest::Approx(ref.r).epsilon(1e-12));
    CHECK(rep.f1 == doctest::Approx(ref.f1).epsilon(1e-12));
    CHECK(rep.tf1 == doctest::Approx(ref.tf1).epsilon(1e-12));
  }
}

TEST_CASE("fragmenting a detected run hurts precision more than recall") {
  LabeledCorpus whole;
  whole.push_back({"a", {0, 1, 1, 1, 1, 1, 0}, {0, 1, 1, 1, 1, 1, 0}});
  // dropping one interior point splits the run in two: |C_o| gains a run
  // while the Jaccard mass shrinks only slightly
  LabeledCorpus split;
  split.push_back({"a", {0, 1, 1, 1, 1, 1, 0}, {0, 1, 1, 0, 1, 1, 0}});

  auto rep_whole = evaluate(whole);
  auto rep_split = evaluate(split);
  CHECK(rep_split.detected_runs == 2);
  CHECK(rep_split.precision < rep_whole.precision);
  CHECK(rep_whole.precision - rep_split.precision >
        rep_whole.recall - rep_split.recall);
}
