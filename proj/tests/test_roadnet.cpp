#include <sstream>

#include <doctest.h>

#include "oasd/error.hpp"
#include "oasd/roadnet.hpp"
#include "oasd/synthgen.hpp"
#include "test_support.hpp"

using namespace oasd;

namespace {

RoadNetwork parse(const std::string& text) {
  std::istringstream in(text);
  return RoadNetwork::load(in);
}

}  // namespace

TEST_CASE("single segment network has zero degrees") {
  auto net = parse(R"({"vertices":[{"id":"a","x":0,"y":0},{"id":"b","x":1,"y":0}],
                       "segments":[{"id":"e1","from":"a","to":"b","length":5}]})");
  const SegIdx e1 = net.require_segment("e1");
  CHECK(net.out_degree(e1) == 0);
  CHECK(net.in_degree(e1) == 0);
  CHECK(net.segment(e1).length == 5.0);
}

TEST_CASE("unknown vertex reference names the culprit") {
  const std::string text = R"({"vertices":[{"id":"a"}],
      "segments":[{"id":"e1","from":"a","to":"z"}]})";
  CHECK_THROWS_WITH_AS(parse(text), doctest::Contains("'z'"), Error);
}

TEST_CASE("malformed json reports a line number") {
  try {
    parse("{\n\"vertices\": [\n} oops");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == "parse");
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("serialize then load is the identity on the logical graph") {
  SynthConfig cfg;
  cfg.grid_width = 4;
  cfg.grid_height = 4;
  cfg.sd_pairs = 0;
  auto world = generate(cfg);

  std::ostringstream out;
  world.net.save(out);
  std::istringstream in(out.str());
  RoadNetwork reloaded = RoadNetwork::load(in);
  CHECK(reloaded == world.net);
}

TEST_CASE("degree queries match a brute-force scan") {
  Rng rng(11);
  RoadNetwork net = test::random_network(6, 20, rng);
  for (SegIdx e = 0; e < net.segment_count(); ++e) {
    std::size_t out = 0, in = 0;
    for (SegIdx other = 0; other < net.segment_count(); ++other) {
      if (net.segment(other).from == net.segment(e).to) ++out;
      if (net.segment(other).to == net.segment(e).from) ++in;
    }
    CHECK(net.out_degree(e) == out);
    CHECK(net.in_degree(e) == in);
  }
}

TEST_CASE("adjacency matches endpoint comparison on all pairs") {
  Rng rng(12);
  RoadNetwork net = test::random_network(5, 10, rng);
  for (SegIdx a = 0; a < net.segment_count(); ++a) {
    for (SegIdx b = 0; b < net.segment_count(); ++b) {
      const bool expected = net.segment(a).to == net.segment(b).from;
      CHECK(net.is_adjacent(a, b) == expected);
    }
  }
}

TEST_CASE("out degree equals the count of adjacent successors") {
  Rng rng(13);
  RoadNetwork net = test::random_network(8, 60, rng);
  for (SegIdx e = 0; e < net.segment_count(); ++e) {
    std::size_t out_count = 0, in_count = 0;
    for (SegIdx other = 0; other < net.segment_count(); ++other) {
      if (net.is_adjacent(e, other)) ++out_count;
      if (net.is_adjacent(other, e)) ++in_count;
    }
    CHECK(net.out_degree(e) == out_count);
    CHECK(net.in_degree(e) == in_count);
  }
}

TEST_CASE("unknown ids raise not-found errors") {
  auto world = test::make_three_route_world();
  CHECK_THROWS_AS((void)world.net.require_segment("nope"), Error);
  CHECK(!world.net.find_segment("nope").has_value());
  CHECK_THROWS_AS((void)world.net.segment(10000), Error);
}

TEST_CASE("worked example world wiring") {
  auto world = test::make_three_route_world();
  const SegIdx e1 = world.net.require_segment("e1");
  const SegIdx e2 = world.net.require_segment("e2");
  const SegIdx e3 = world.net.require_segment("e3");
  CHECK(world.net.is_adjacent(e1, e2));
  CHECK(world.net.is_adjacent(e1, e3));
  CHECK(!world.net.is_adjacent(e2, e3));
  CHECK(world.net.out_degree(e1) == 2);  // e2 and e3 leave vertex b
}
