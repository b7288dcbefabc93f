#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nxscreen/gbc.hpp"
#include "nxscreen/oracle.hpp"
#include "support.hpp"

using namespace nxscreen;

namespace {

WeightedGraph path4() {
  WeightedGraph g;
  g.node_count = 4;
  g.edges = {{0, 1, 1.0, 0}, {1, 2, 1.0, 1}, {2, 3, 1.0, 2}};
  return g;
}

WeightedGraph star(std::size_t leaves) {
  WeightedGraph g;
  g.node_count = leaves + 1;
  for (std::size_t i = 0; i < leaves; ++i) g.edges.push_back({0, i + 1, 1.0, i});
  return g;
}

std::vector<std::size_t> random_subset(std::mt19937_64& rng, const WeightedGraph& g, double p) {
  std::bernoulli_distribution keep(p);
  std::vector<std::size_t> out;
  for (const auto& e : g.edges) {
    if (keep(rng)) out.push_back(e.id);
  }
  return out;
}

}  // namespace

TEST_CASE("empty group scores zero") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    WeightedGraph g = testing::random_graph(rng, 8, 6);
    for (auto ex : {PairExclusion::None, PairExclusion::BothEndpoints, PairExclusion::EitherEndpoint}) {
      CHECK(gbc_score(g, {}, ex) == 0.0);
    }
  }
}

TEST_CASE("middle edge of a four-node path") {
  WeightedGraph g = path4();
  CHECK(gbc_score(g, {1}, PairExclusion::None) == doctest::Approx(8.0));
  CHECK(gbc_score(g, {1}, PairExclusion::BothEndpoints) == doctest::Approx(6.0));
  CHECK(gbc_score(g, {1}, PairExclusion::EitherEndpoint) == doctest::Approx(2.0));
}

TEST_CASE("whole edge set with either-endpoint exclusion") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    WeightedGraph g = testing::random_graph(rng, 9, 5);
    std::vector<std::size_t> all;
    for (const auto& e : g.edges) all.push_back(e.id);
    CHECK(gbc_score(g, all, PairExclusion::EitherEndpoint) == 0.0);
    // Without exclusion every pair of a connected graph is covered.
    CHECK(gbc_score(g, all) == doctest::Approx(9.0 * 8.0));
  }
}

TEST_CASE("parallel edges split the path count") {
  WeightedGraph g;
  g.node_count = 2;
  g.edges = {{0, 1, 1.0, 10}, {0, 1, 1.0, 11}};
  CHECK(gbc_score(g, {10}) == doctest::Approx(1.0));
  CHECK(gbc_score(g, {10, 11}) == doctest::Approx(2.0));
  g.edges[1].weight = 2.0;
  CHECK(gbc_score(g, {10}) == doctest::Approx(2.0));
  CHECK(gbc_score(g, {11}) == 0.0);
}

TEST_CASE("star graph greedy matches exhaustive") {
  WeightedGraph g = star(4);
  CHECK(gbc_score(g, {0}) == doctest::Approx(8.0));
  CHECK(gbc_score(g, {0, 1}) == doctest::Approx(14.0));
  GbcResult r = select_group(g, 2, {});
  CHECK(r.group == std::vector<std::size_t>{0, 1});
  REQUIRE(r.scores.size() == 2);
  CHECK(r.scores[1] == doctest::Approx(14.0));
  ExhaustiveGbc ex = gbc_exhaustive(g, 2);
  CHECK(ex.group == std::vector<std::size_t>{0, 1});
  CHECK(ex.score == doctest::Approx(r.scores[1]));
}

TEST_CASE("forced seed and parameter errors") {
  WeightedGraph g = path4();
  GbcResult r = select_group(g, 1, {2});
  CHECK(r.group == std::vector<std::size_t>{2});
  CHECK(r.scores[0] == doctest::Approx(6.0));
  r = select_group(g, 2, {2});
  CHECK(r.group == std::vector<std::size_t>{2, 0});  // edges 0 and 1 both gain 4

  CHECK_THROWS_AS(select_group(g, 0, {}), InvalidParameterError);
  CHECK_THROWS_AS(select_group(g, 4, {}), InvalidParameterError);
  CHECK_THROWS_AS(select_group(g, 1, {0, 1}), InvalidParameterError);
}

TEST_CASE("greedy tie goes to the smallest id") {
  WeightedGraph g;
  g.node_count = 4;
  g.edges = {{0, 1, 1.0, 7}, {1, 2, 1.0, 3}, {2, 3, 1.0, 5}, {3, 0, 1.0, 9}};
  GbcResult r = select_group(g, 1, {});
  CHECK(r.group == std::vector<std::size_t>{3});
}

TEST_CASE("score bounds, monotonicity and submodularity without exclusion") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t n = 3 + trial % 12;
    WeightedGraph g = testing::random_graph(rng, n, trial % 7, trial % 3 == 0);
    GroupBetweenness gb(g);
    auto b = random_subset(rng, g, 0.5);
    std::vector<std::size_t> a;
    for (auto id : b) {
      if (rng() % 2) a.push_back(id);
    }
    double fa = gb.score(a), fb = gb.score(b);
    double cap = static_cast<double>(n * (n - 1));
    CHECK(fa >= 0.0);
    CHECK(fb <= cap + 1e-9);
    CHECK(fa <= fb + 1e-9);
    for (const auto& e : g.edges) {
      if (std::find(b.begin(), b.end(), e.id) != b.end()) continue;
      auto a2 = a, b2 = b;
      a2.push_back(e.id);
      b2.push_back(e.id);
      CHECK(gb.score(a2) - fa >= gb.score(b2) - fb - 1e-9);
    }
  }
}

TEST_CASE("fast scores agree with explicit path enumeration") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 120; ++trial) {
    WeightedGraph g = testing::random_graph(rng, 4 + trial % 10, trial % 8, trial % 4 == 0);
    auto ids = random_subset(rng, g, 0.3);
    for (auto ex : {PairExclusion::None, PairExclusion::BothEndpoints, PairExclusion::EitherEndpoint}) {
      CHECK(gbc_score(g, ids, ex) == doctest::Approx(gbc_enumerated_score(g, ids, ex)).epsilon(1e-9));
    }
  }
}

TEST_CASE("tied path lengths from sums of short edges") {
  // Six-node ring of length 4 with a detached edge; several pairs sit
  // exactly half way round, where 0.5 + 0.5 must tie with 1.0.
  WeightedGraph g;
  g.node_count = 9;
  g.edges = {{1, 3, 0.5, 2}, {2, 4, 0.5, 3}, {2, 5, 1.0, 4}, {4, 8, 0.5, 8},
             {1, 8, 0.5, 9}, {5, 3, 1.0, 11}, {0, 6, 1.5, 12}};
  CHECK(gbc_score(g, {3}) == doctest::Approx(10.0));
  CHECK(gbc_enumerated_score(g, {3}) == doctest::Approx(10.0));
}

TEST_CASE("greedy scores never decrease") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    WeightedGraph g = testing::random_graph(rng, 12, 8);
    std::size_t x = 1 + trial % 5;
    GbcResult r = select_group(g, x, {});
    REQUIRE(r.group.size() == x);
    for (std::size_t i = 1; i < x; ++i) CHECK(r.scores[i] >= r.scores[i - 1] - 1e-12);
    CHECK(r.scores.back() == doctest::Approx(gbc_score(g, r.group)));
  }
}

TEST_CASE("greedy stays within the submodular bound") {
  std::mt19937_64 rng(8);
  const double ratio = 1.0 - 1.0 / std::exp(1.0);
  for (int trial = 0; trial < 60; ++trial) {
    WeightedGraph g = testing::random_graph(rng, 6 + trial % 5, 3);
    if (g.edges.size() > 12) g.edges.resize(12);
    std::size_t x = 1 + trial % 3;
    if (x > g.edges.size()) continue;
    GbcResult r = select_group(g, x, {});
    ExhaustiveGbc best = gbc_exhaustive(g, x);
    CHECK(r.scores.back() >= ratio * best.score - 1e-9);
    CHECK(r.scores.back() <= best.score + 1e-9);
  }
}

TEST_CASE("subgraph view keeps branch ids") {
  const NetworkCase& grid = testing::case200();
  DcSolution dc = solve_dc(grid);
  BranchMetrics m = compute_metrics(compute_lodf(grid, dc), dc);
  GridGraph graph = build_graph(grid, m);
  auto top = rank_branches(m, 5.0);
  SearchSubgraph sub = build_subgraph(graph, top.front(), top, {2, 3});
  WeightedGraph w = subgraph_view(graph, sub);
  CHECK(w.node_count == sub.nodes.size());
  REQUIRE(w.edges.size() == sub.edge_set.size());
  for (std::size_t i = 0; i < w.edges.size(); ++i) {
    CHECK(w.edges[i].id == sub.edge_set[i]);
    CHECK(w.edges[i].weight == graph.edge_for(sub.edge_set[i]).weight);
  }
}
