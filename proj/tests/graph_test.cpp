// Copyright 2026 The ctrlgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ctrlgraph/graph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"

namespace ctrlgraph {
namespace {

AttributeVector Expect(std::initializer_list<double> v) {
  AttributeVector c;
  std::copy(v.begin(), v.end(), c.values.begin());
  return c;
}

void ExpectAttributesNear(const AttributeVector& got,
                          const AttributeVector& want) {
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    EXPECT_NEAR(got.values[i], want.values[i], 1e-12) << kAttributeNames[i];
  }
}

std::vector<NodeId> RandomPermutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

TEST(GraphTest, RejectsInvalidEdges) {
  Graph g(3);
  EXPECT_THROW(g.AddEdge(1, 1), std::invalid_argument);
  EXPECT_THROW(g.AddEdge(0, 3), std::invalid_argument);
  EXPECT_TRUE(g.AddEdge(2, 0));
  EXPECT_FALSE(g.AddEdge(0, 2));
  std::vector<Edge> dup = {{0, 1}, {1, 0}};
  EXPECT_THROW(Graph(2, dup), std::invalid_argument);
}

// Expected values hand-derived and cross-checked with the brute-force
// oracle in oracles.hpp.
TEST(ComputeAttributesTest, Triangle) {
  auto c = ComputeAttributes(Graph::Complete(3));
  ExpectAttributesNear(c, Expect({3, 3, 0, 0.5, 2, 2, 1, 1, 2, 1.0, 1.0, 1.0}));
  ExpectAttributesNear(c, oracle::Attributes(Graph::Complete(3)));
}

TEST(ComputeAttributesTest, PathOfFour) {
  auto c = ComputeAttributes(Graph::Path(4));
  ExpectAttributesNear(c,
                       Expect({4, 3, 3, 0.25, 1, 1, 3, 3, 1, 0.625, 0.0, 0.0}));
  ExpectAttributesNear(c, oracle::Attributes(Graph::Path(4)));
}

TEST(ComputeAttributesTest, StarWithThreeLeaves) {
  auto c = ComputeAttributes(Graph::Star(3));
  ExpectAttributesNear(c, Expect({4, 3, 3, 0.25, 1, 1, 3, 2, 1, 0.7, 0.0, 0.0}));
}

TEST(ComputeAttributesTest, SingleNodeAndDisconnected) {
  auto single = ComputeAttributes(Graph(1));
  EXPECT_EQ(single[Attr::kDensity], 0.0);
  EXPECT_EQ(single[Attr::kDiameter], 0.0);
  EXPECT_EQ(single[Attr::kClosenessCentrality], 0.0);
  EXPECT_EQ(single[Attr::kMaxCliques], 1.0);

  // Two disjoint edges plus a triangle.
  std::vector<Edge> e = {{0, 1}, {2, 3}, {4, 5}, {5, 6}, {4, 6}};
  Graph g(7, e);
  auto c = ComputeAttributes(g);
  EXPECT_EQ(c[Attr::kEdgeConnectivity], 0.0);
  EXPECT_EQ(c[Attr::kNodeConnectivity], 0.0);
  EXPECT_EQ(c[Attr::kDiameter], 1.0);
  ExpectAttributesNear(c, oracle::Attributes(g));
}

TEST(ComputeAttributesTest, TreesHaveNoTrianglesAndWidthOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph t = BarabasiAlbert(15, 1, seed);
    auto c = ComputeAttributes(t);
    EXPECT_EQ(c[Attr::kLocalBridges], c[Attr::kEdges]);
    EXPECT_EQ(c[Attr::kTransitivity], 0.0);
    EXPECT_EQ(c[Attr::kClusteringCoefficient], 0.0);
    EXPECT_EQ(c[Attr::kTreewidthMinDegree], 1.0);
  }
}

TEST(ComputeAttributesTest, CompleteGraphs) {
  for (std::size_t n = 3; n <= 12; ++n) {
    auto c = ComputeAttributes(Graph::Complete(n));
    EXPECT_EQ(c[Attr::kEdgeConnectivity], n - 1.0);
    EXPECT_EQ(c[Attr::kNodeConnectivity], n - 1.0);
    EXPECT_EQ(c[Attr::kDiameter], 1.0);
    EXPECT_EQ(c[Attr::kTransitivity], 1.0);
    EXPECT_EQ(c[Attr::kTreewidthMinDegree], n - 1.0);
  }
}

TEST(ComputeAttributesTest, DensityTimesPairsEqualsEdges) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Graph g = ErdosRenyi(2 + seed % 30, 0.3, seed);
    auto c = ComputeAttributes(g);
    const double n = c[Attr::kNodes];
    EXPECT_NEAR(c[Attr::kDensity] * n * (n - 1), c[Attr::kEdges], 1e-12);
  }
}

TEST(ComputeAttributesTest, InvariantUnderRelabeling) {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Graph g = seed % 2 ? ErdosRenyi(6 + seed % 25, 0.25, seed)
                       : BarabasiAlbert(8 + seed % 30, 1 + seed % 3, seed);
    auto base = ComputeAttributes(g);
    for (int rep = 0; rep < 3; ++rep) {
      auto perm = RandomPermutation(g.num_nodes(), rng);
      EXPECT_EQ(ComputeAttributes(g.Relabeled(perm)), base) << "seed " << seed;
    }
  }
}

TEST(ComputeAttributesTest, TreewidthTieOrderIsResolvedByMinimum) {
  // Min-degree elimination on this graph reaches width 3 or 4 depending on
  // which degree-3 vertex goes first.
  std::vector<Edge> e = {{0, 1}, {0, 3}, {0, 4}, {0, 5}, {1, 3},
                         {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}};
  Graph g(6, e);
  EXPECT_EQ(TreewidthMinDegree(g), 3u);
  EXPECT_EQ(oracle::TreewidthMinDegree(g), 3u);
}

TEST(ComputeAttributesTest, AgreesWithOracleOnRandomSevenNodeGraphs) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    Graph g = oracle::FromMask(7, rng() & ((1ULL << 21) - 1));
    ExpectAttributesNear(ComputeAttributes(g), oracle::Attributes(g));
  }
}

TEST(ComputeAttributesTest, MaxCliqueLimitIsEnforcedOnlyPastLimit) {
  // Complement of a perfect matching on 2k nodes has 2^k maximal cliques.
  Graph g = Graph::Complete(20);
  Graph cocktail(20);
  for (const auto& [u, v] : g.edges())
    if (!(u % 2 == 0 && v == u + 1)) cocktail.AddEdge(u, v);
  EXPECT_EQ(CountMaximalCliques(cocktail), 1u << 10);
}

TEST(BfsCanonicalOrderTest, Examples) {
  EXPECT_EQ(BfsCanonicalOrder(Graph(1)), std::vector<NodeId>({0}));
  EXPECT_EQ(BfsCanonicalOrder(Graph::Path(3)), std::vector<NodeId>({1, 0, 2}));
  std::vector<Edge> star = {{2, 0}, {2, 1}, {2, 3}};
  EXPECT_EQ(BfsCanonicalOrder(Graph(4, star)),
            std::vector<NodeId>({2, 0, 1, 3}));
}

TEST(BfsCanonicalOrderTest, UnreachedComponentsFollowByRootId) {
  // Components: {0,1} (root 0), {2,3,4,5} star at 4 (global root), {6}.
  std::vector<Edge> e = {{0, 1}, {4, 2}, {4, 3}, {4, 5}};
  auto order = BfsCanonicalOrder(Graph(7, e));
  EXPECT_EQ(order, std::vector<NodeId>({4, 2, 3, 5, 0, 1, 6}));
}

TEST(BfsCanonicalOrderTest, IsAPermutation) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = ErdosRenyi(25, 0.08, seed);
    auto order = BfsCanonicalOrder(g);
    std::sort(order.begin(), order.end());
    std::vector<NodeId> ids(g.num_nodes());
    std::iota(ids.begin(), ids.end(), 0);
    EXPECT_EQ(order, ids);
    EXPECT_TRUE(IsIsomorphic(BfsCanonicalize(g), g));
  }
}

TEST(BarabasiAlbertTest, Examples) {
  Graph k2 = BarabasiAlbert(2, 1, 3);
  ASSERT_EQ(k2.num_edges(), 1u);
  EXPECT_TRUE(k2.has_edge(0, 1));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph tree = BarabasiAlbert(10, 1, seed);
    EXPECT_EQ(tree.num_edges(), 9u);
    EXPECT_TRUE(IsConnected(tree));  // connected with n-1 edges => acyclic
  }
  EXPECT_EQ(BarabasiAlbert(20, 2, 5).num_edges(), 36u);
  EXPECT_TRUE(IsConnected(BarabasiAlbert(20, 2, 5)));
}

TEST(BarabasiAlbertTest, RejectsBadParameters) {
  EXPECT_THROW(BarabasiAlbert(5, 5, 0), std::invalid_argument);
  EXPECT_THROW(BarabasiAlbert(5, 0, 0), std::invalid_argument);
}

TEST(BarabasiAlbertTest, DeterministicPerSeed) {
  EXPECT_EQ(BarabasiAlbert(30, 3, 42), BarabasiAlbert(30, 3, 42));
}

TEST(ErdosRenyiTest, Extremes) {
  EXPECT_EQ(ErdosRenyi(12, 0.0, 1).num_edges(), 0u);
  EXPECT_EQ(ErdosRenyi(12, 1.0, 1).num_edges(), 66u);
  EXPECT_THROW(ErdosRenyi(5, 1.5, 1), std::invalid_argument);
}

TEST(ErdosRenyiTest, MeanEdgeCountMatchesBinomialExpectation) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    total += static_cast<double>(ErdosRenyi(30, 0.1, seed).num_edges());
  }
  EXPECT_NEAR(total / 1000.0, 43.5, 0.05 * 43.5);
}

TEST(IsIsomorphicTest, Examples) {
  std::vector<NodeId> perm = {2, 0, 1};
  Graph k3 = Graph::Complete(3);
  EXPECT_TRUE(IsIsomorphic(k3, k3.Relabeled(perm)));
  EXPECT_FALSE(IsIsomorphic(k3, Graph::Path(3)));
}

TEST(IsIsomorphicTest, AgreesWithPermutationBruteForce) {
  std::mt19937_64 rng(3);
  for (std::size_t n = 1; n <= 7; ++n) {
    const std::uint64_t masks = 1ULL << oracle::PairCount(n);
    for (int i = 0; i < 400; ++i) {
      Graph a = oracle::FromMask(n, rng() % masks);
      // Half the time compare against a relabeled copy with one edge toggled
      // so that near-misses are exercised.
      Graph b = a.Relabeled(RandomPermutation(n, rng));
      if (i % 2 && n >= 2) {
        std::vector<Edge> e(b.edges().begin(), b.edges().end());
        NodeId u = rng() % n, v = rng() % n;
        if (u != v) {
          Edge t{std::min(u, v), std::max(u, v)};
          auto it = std::find(e.begin(), e.end(), t);
          if (it != e.end()) {
            e.erase(it);
          } else {
            e.push_back(t);
          }
          b = Graph(n, e);
        }
      }
      EXPECT_EQ(IsIsomorphic(a, b), oracle::Isomorphic(a, b));
    }
  }
}

TEST(IsIsomorphicTest, EquivalenceRelationOnCorpus) {
  std::vector<Graph> corpus;
  for (std::uint64_t s = 0; s < 30; ++s) corpus.push_back(ErdosRenyi(6, 0.4, s));
  for (const auto& a : corpus) {
    EXPECT_TRUE(IsIsomorphic(a, a));
    for (const auto& b : corpus) {
      EXPECT_EQ(IsIsomorphic(a, b), IsIsomorphic(b, a));
      if (!IsIsomorphic(a, b)) continue;
      for (const auto& c : corpus) {
        if (IsIsomorphic(b, c)) {
          EXPECT_TRUE(IsIsomorphic(a, c));
        }
      }
    }
  }
}

TEST(IsIsomorphicTest, RegularGraphsNeedBacktracking) {
  // C6 vs two triangles: same degree sequence, not isomorphic.
  std::vector<Edge> tri = {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  EXPECT_FALSE(IsIsomorphic(Graph::Cycle(6), Graph(6, tri)));
}

TEST(EdgeListTest, ParsesCommentsAndMergesDuplicates) {
  std::istringstream in("# toy\n0 1\n1 2\n\n2 1\n# end\n3 0\n");
  Graph g = ReadEdgeList(in);
  EXPECT_EQ(g.num_nodes(), 4u);
  EXPECT_EQ(g.num_edges(), 3u);
  std::ostringstream out;
  WriteEdgeList(g, out);
  std::istringstream back(out.str());
  EXPECT_EQ(ReadEdgeList(back), g);
}

TEST(EdgeListTest, RejectsMalformedLines) {
  std::istringstream bad("0 1\nx y\n");
  EXPECT_THROW(ReadEdgeList(bad), std::runtime_error);
  std::istringstream loop("2 2\n");
  EXPECT_THROW(ReadEdgeList(loop), std::runtime_error);
}

TEST(DotTest, ListsNodesAndEdges) {
  auto dot = ToDot(Graph::Path(2), "p");
  EXPECT_NE(dot.find("0 -- 1"), std::string::npos);
  EXPECT_EQ(dot.rfind("graph \"p\"", 0), 0u);
}

}  // namespace
}  // namespace ctrlgraph
