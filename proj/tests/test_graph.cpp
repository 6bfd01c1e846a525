#include <gtest/gtest.h>

#include <cmath>

#include "shapefit/graph.hpp"
#include "test_util.hpp"

namespace shapefit {
namespace {

Graph star(int n) {
  std::vector<EdgePair> edges;
  for (int j = 1; j < n; ++j) edges.push_back({0, j});
  return Graph(n, edges);
}

Graph two_k4() {
  std::vector<EdgePair> edges;
  for (int base : {0, 4}) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) edges.push_back({base + i, base + j});
    }
  }
  return Graph(8, edges);
}

TEST(Graph, ValidatesAndSortsEdges) {
  const Graph g(4, {{2, 3}, {0, 1}, {1, 2}});
  EXPECT_EQ(g.edges(), (std::vector<EdgePair>{{0, 1}, {1, 2}, {2, 3}}));
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(0, 3));
  EXPECT_EQ(g.degrees(), (std::vector<int>{1, 2, 2, 1}));
  EXPECT_THROW(Graph(3, {{0, 0}}), InvalidInputError);
  EXPECT_THROW(Graph(3, {{0, 3}}), InvalidInputError);
  EXPECT_THROW(Graph(3, {{0, 1}, {0, 1}}), InvalidInputError);
}

TEST(ErdosRenyi, Extremes) {
  EXPECT_EQ(sample_erdos_renyi(6, 1.0, 5).edge_count(), 15);
  EXPECT_EQ(sample_erdos_renyi(6, 0.0, 5).edge_count(), 0);
  EXPECT_EQ(sample_erdos_renyi(1, 0.5, 5).edge_count(), 0);
  EXPECT_THROW(sample_erdos_renyi(5, 1.5, 0), InvalidInputError);
}

TEST(ErdosRenyi, DeterministicPerSeed) {
  EXPECT_EQ(sample_erdos_renyi(60, 0.3, 17).edges(), sample_erdos_renyi(60, 0.3, 17).edges());
  EXPECT_NE(sample_erdos_renyi(60, 0.3, 17).edges(), sample_erdos_renyi(60, 0.3, 18).edges());
}

TEST(ErdosRenyi, EdgeCountWithinBinomialBound) {
  const double m = 200.0 * 199.0 / 2.0;
  const double slack = 4.0 * std::sqrt(m * 0.25);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int count = sample_erdos_renyi(200, 0.5, seed).edge_count();
    EXPECT_GE(count, m * 0.5 - slack);
    EXPECT_LE(count, m * 0.5 + slack);
  }
}

TEST(Codegree, CountsCommonNeighbours) {
  const Graph g(5, {{0, 2}, {1, 2}, {0, 3}, {1, 3}, {0, 4}});
  const auto adj = g.adjacency();
  EXPECT_EQ(codegree(adj, 0, 1), 2);
  EXPECT_EQ(codegree(adj, 2, 3), 2);
  EXPECT_EQ(codegree(adj, 0, 4), 0);
}

TEST(PTypical, CompleteGraphs) {
  const TypicalityReport k8 = check_p_typical(Graph(8, testing::complete_edges(8)), 1.0);
  EXPECT_TRUE(k8.is_p_typical);
  EXPECT_TRUE(k8.connected);
  EXPECT_EQ(k8.min_degree, 7);
  EXPECT_EQ(k8.max_degree, 7);
  EXPECT_EQ(k8.min_codegree, 6);
  EXPECT_EQ(k8.max_codegree, 6);
  EXPECT_FALSE(k8.failing_witness.has_value());
  for (int n = 4; n <= 40; ++n) EXPECT_TRUE(check_p_typical(Graph(n, testing::complete_edges(n)), 1.0).is_p_typical);
}

TEST(PTypical, DisconnectedGraph) {
  const TypicalityReport r = check_p_typical(two_k4(), 1.0);
  EXPECT_FALSE(r.connected);
  EXPECT_FALSE(r.is_p_typical);
  ASSERT_TRUE(r.failing_witness.has_value());
  EXPECT_GE(r.failing_witness->i, 4);
  EXPECT_FALSE(is_connected(two_k4()));
}

TEST(PTypical, StarFailsOnLeafDegree) {
  const TypicalityReport r = check_p_typical(star(8), 0.5);
  EXPECT_TRUE(r.connected);
  EXPECT_FALSE(r.is_p_typical);
  EXPECT_EQ(r.min_degree, 1);
  ASSERT_TRUE(r.failing_witness.has_value());
  EXPECT_EQ(r.failing_witness->j, -1);
  EXPECT_NE(r.failing_witness->i, 0);
}

TEST(PTypical, BoundsAreNonStrict) {
  // C4 with p = 0.5: np/2 = 1 <= deg 2 <= 2np = 4; np^2/2 = 0.5 so codegree
  // 0 on adjacent pairs fails.
  const TypicalityReport c4 = check_p_typical(Graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}), 0.5);
  EXPECT_FALSE(c4.is_p_typical);
  ASSERT_TRUE(c4.failing_witness.has_value());
  EXPECT_GE(c4.failing_witness->j, 0);
  // K4 with p = 1: deg 3 in [2, 8], codegree exactly 2 = np^2/2.
  EXPECT_TRUE(check_p_typical(Graph(4, testing::complete_edges(4)), 1.0).is_p_typical);
}

TEST(PTypical, BruteForceAgreement) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = sample_erdos_renyi(30, 0.6, seed);
    const TypicalityReport r = check_p_typical(g, 0.6);
    int min_deg = 1 << 30, max_deg = 0, min_co = 1 << 30, max_co = 0;
    for (int i = 0; i < 30; ++i) {
      int deg = 0;
      for (int j = 0; j < 30; ++j) deg += (i != j && g.has_edge(i, j));
      min_deg = std::min(min_deg, deg);
      max_deg = std::max(max_deg, deg);
      for (int j = i + 1; j < 30; ++j) {
        int co = 0;
        for (int k = 0; k < 30; ++k) co += (k != i && k != j && g.has_edge(i, k) && g.has_edge(j, k));
        min_co = std::min(min_co, co);
        max_co = std::max(max_co, co);
      }
    }
    EXPECT_EQ(r.min_degree, min_deg);
    EXPECT_EQ(r.max_degree, max_deg);
    EXPECT_EQ(r.min_codegree, min_co);
    EXPECT_EQ(r.max_codegree, max_co);
    const double np = 30 * 0.6;
    const bool expected = r.connected && min_deg >= np / 2 && max_deg <= 2 * np && min_co >= np * 0.6 / 2 &&
                          max_co <= 2 * np * 0.6;
    EXPECT_EQ(r.is_p_typical, expected);
  }
}

}  // namespace
}  // namespace shapefit
