#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "proid/error.hpp"
#include "proid/node_graph.hpp"

using namespace proid;

namespace {

Node at(int bin, double r, double cost = 1.0) {
  Node n;
  n.theta_bin = bin;
  n.theta_deg = bin;
  n.r = r;
  n.cost = cost;
  return n;
}

std::vector<int> ids_at(const NodeGraph& g, const std::vector<int>& ids, int bin) {
  std::vector<int> out;
  for (int id : ids)
    if (g.node(id).theta_bin == bin) out.push_back(id);
  return out;
}

}  // namespace

TEST_CASE("peak detection") {
  const std::vector<double> a{0, 3, 1, 5, 2};
  const auto p = detect_peaks(a);
  REQUIRE(p.size() == 2);
  CHECK(p[0].index == 1);
  CHECK(p[0].value == 3);
  CHECK(p[1].index == 3);
  CHECK(p[1].value == 5);

  CHECK(detect_peaks(std::vector<double>{1, 2, 3, 4, 5}).empty());

  const auto plateau = detect_peaks(std::vector<double>{0, 5, 5, 5, 0});
  REQUIRE(plateau.size() == 1);
  CHECK(plateau[0].index == 2);
}

TEST_CASE("prominence examples") {
  const std::vector<double> a{0, 3, 1, 5, 2};
  CHECK(prominence(a, 3) == 3.0);
  CHECK(prominence(a, 1) == 2.0);
  CHECK(prominence(std::vector<double>{0, 5, 0}, 1) == 5.0);
  CHECK_THROWS_AS(prominence(a, 2), Error);
}

TEST_CASE("peaks and prominence agree with brute force on random profiles") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto v = oracle::random_profile(rng);
    const auto found = detect_peaks(v);
    const auto expected = oracle::peaks(v);
    REQUIRE(found.size() == expected.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
      REQUIRE(found[i].index == expected[i]);
      REQUIRE(prominence(v, found[i].index) == oracle::prominence(v, expected[i]));
    }
  }
}

TEST_CASE("pruning drops nodes above 1.25 times the mean cost") {
  std::vector<Node> nodes{at(0, 1, 0.4), at(1, 1, 0.5), at(2, 1, 0.6), at(3, 1, 2.0)};
  CHECK(mean_node_cost(nodes) == doctest::Approx(0.875));
  const auto kept = prune_by_cost(nodes, 1.25);
  REQUIRE(kept.size() == 3);
  for (const auto& n : kept) CHECK(n.cost < 1.09375);
}

TEST_CASE("identical peaks all cost one half and survive") {
  PolarImage polar(12, 360, 1.0, 1.0, {50, 50});
  for (int k = 0; k < 360; ++k) polar.at(4, k) = 1.0f;
  const UipFrame uips{{50, 30}, {40, 60}, {60, 60}};
  const auto g = build_nodes(polar, uips);
  CHECK(g.size() == 360);
  CHECK(g.peak_count == 360);
  for (const auto& n : g.nodes()) {
    CHECK(n.cost == doctest::Approx(0.5));
    CHECK(n.r == 4.0);
  }
}

TEST_CASE("radial cap limits node radii") {
  PolarImage polar(60, 360, 1.0, 1.0, {50, 50});
  for (int k = 0; k < 360; ++k) {
    polar.at(5, k) = 1.0f;
    polar.at(50, k) = 1.0f;
  }
  const UipFrame uips{{50, 40}, {45, 55}, {55, 55}};
  const auto g = build_nodes(polar, uips);
  for (const auto& n : g.nodes()) CHECK(n.r <= g.radial_cap);
  CHECK(g.size() == 360);
}

TEST_CASE("neighbor window and the forward exception") {
  Sweep sweep{0, 1, 40, 360};
  {
    NodeGraph g({at(10, 50), at(12, 50), at(16, 50)}, 360, 1.0);
    const auto n = neighbors(g, 0, 2.0, sweep);
    REQUIRE(n.size() == 1);
    CHECK(g.node(n[0]).theta_bin == 12);
  }
  {
    NodeGraph g({at(10, 50), at(20, 40), at(20, 60)}, 360, 1.0);
    const auto n = neighbors(g, 0, 2.0, sweep);
    CHECK(n.size() == 2);
    CHECK(ids_at(g, n, 20).size() == 2);
  }
}

TEST_CASE("neighbor sets match a full scan on random graphs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto rg = oracle::random_graph(rng);
    for (const auto& n : rg.graph.nodes()) {
      auto got = neighbors(rg.graph, n.id, rg.dl, rg.sweep);
      auto want = oracle::forward(rg.graph, n.id, rg.dl, rg.sweep);
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      REQUIRE(got == want);
    }
  }
}

TEST_CASE("window restriction keeps nodes within the tolerance") {
  auto expected = fixture::circle({0, 0}, 100.0, 21, 0);
  expected.apex_index = 10;
  {
    NodeGraph g({at(5, 120), at(5, 130), at(15, 100)}, 360, 1.0);
    const auto w = restrict_to_window(g, expected, 0.25);
    REQUIRE(w.size() == 2);
    CHECK(w.node(0).r == 120);
    CHECK(w.node(1).r == 100);
  }
  {
    NodeGraph g({at(5, 100), at(15, 100), at(15, 101), at(100, 7)}, 360, 1.0);
    const auto w = restrict_to_window(g, expected, 0.0);
    REQUIRE(w.size() == 3);
    CHECK(w.node(2).r == 7);
  }
  {
    NodeGraph g({at(5, 100), at(15, 140)}, 360, 1.0);
    CHECK_THROWS_AS(restrict_to_window(g, expected, 0.25), Error);
  }
}
