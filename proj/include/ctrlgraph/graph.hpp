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

#ifndef CTRLGRAPH_GRAPH_HPP_
#define CTRLGRAPH_GRAPH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ctrlgraph {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Undirected simple graph over nodes 0..num_nodes-1. Edges are stored as
// sorted (u < v) pairs; adjacency lists are kept sorted ascending.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t num_nodes);
  // Throws std::invalid_argument on self-loops, duplicates or out-of-range
  // endpoints.
  Graph(std::size_t num_nodes, std::span<const Edge> edges);

  static Graph Complete(std::size_t n);
  static Graph Path(std::size_t n);
  static Graph Cycle(std::size_t n);
  // Node 0 is the center.
  static Graph Star(std::size_t leaves);

  std::size_t num_nodes() const { return adj_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeId>& neighbors(NodeId v) const { return adj_[v]; }
  std::size_t degree(NodeId v) const { return adj_[v].size(); }
  bool has_edge(NodeId u, NodeId v) const;

  // Throws on invalid edges. Returns false if the edge already existed.
  bool AddEdge(NodeId u, NodeId v);

  // perm[old] = new.
  Graph Relabeled(std::span<const NodeId> perm) const;
  // Induced subgraph on `nodes`; node nodes[i] becomes i.
  Graph Induced(std::span<const NodeId> nodes) const;

  std::vector<std::size_t> DegreeSequence() const;  // sorted descending

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.adj_.size() == b.adj_.size() && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::vector<NodeId>> adj_;
  std::vector<Edge> edges_;  // kept sorted
};

// The twelve control attributes, in the fixed order used by every vector
// representation in the library.
enum class Attr : std::size_t {
  kNodes = 0,
  kEdges,
  kLocalBridges,
  kDensity,
  kEdgeConnectivity,
  kNodeConnectivity,
  kMaxCliques,
  kDiameter,
  kTreewidthMinDegree,
  kClosenessCentrality,
  kClusteringCoefficient,
  kTransitivity,
};

inline constexpr std::size_t kNumAttributes = 12;

inline constexpr std::array<std::string_view, kNumAttributes> kAttributeNames = {
    "nodes",
    "edges",
    "local_bridges",
    "density",
    "edge_connectivity",
    "node_connectivity",
    "max_cliques",
    "diameter",
    "treewidth_min_degree",
    "closeness_centrality",
    "clustering_coefficient",
    "transitivity",
};

// True for attributes that are integer counts (serialized as integers).
bool IsCountAttribute(Attr a);
std::optional<Attr> AttributeFromName(std::string_view name);
std::string_view AttributeName(Attr a);

struct AttributeVector {
  std::array<double, kNumAttributes> values{};

  double& operator[](Attr a) { return values[static_cast<std::size_t>(a)]; }
  double operator[](Attr a) const {
    return values[static_cast<std::size_t>(a)];
  }
  friend bool operator==(const AttributeVector&,
                         const AttributeVector&) = default;
};

AttributeVector ComputeAttributes(const Graph& g);

// Individual extractors, exposed for testing and for reuse by metrics.
std::size_t CountLocalBridges(const Graph& g);
double Density(const Graph& g);
std::size_t EdgeConnectivity(const Graph& g);
std::size_t NodeConnectivity(const Graph& g);
// Throws std::runtime_error past kMaxCliqueLimit maximal cliques.
std::size_t CountMaximalCliques(const Graph& g);
inline constexpr std::size_t kMaxCliqueLimit = 1'000'000;
std::size_t Diameter(const Graph& g);
std::size_t TreewidthMinDegree(const Graph& g);
double ClosenessCentrality(const Graph& g);
double AverageClustering(const Graph& g);
double Transitivity(const Graph& g);

bool IsConnected(const Graph& g);
// Hop distances from `source`; unreachable nodes hold SIZE_MAX.
std::vector<std::size_t> BfsDistances(const Graph& g, NodeId source);
// Component label per node, labels assigned in order of lowest member id.
std::vector<std::size_t> ConnectedComponents(const Graph& g);

// Returns the visiting order (order[i] = old id of the node placed at i).
// Each component is traversed breadth-first from its maximum-degree node
// (lowest id on ties) with neighbors in ascending id order; the component
// holding the global root comes first, remaining ones follow by root id.
std::vector<NodeId> BfsCanonicalOrder(const Graph& g);
// Applies BfsCanonicalOrder so that the node visited i-th becomes node i.
Graph BfsCanonicalize(const Graph& g);

// Preferential attachment starting from m isolated nodes; m*(n-m) edges.
// Throws std::invalid_argument unless 1 <= m < n.
Graph BarabasiAlbert(std::size_t n, std::size_t m, std::uint64_t seed);
Graph ErdosRenyi(std::size_t n, double p, std::uint64_t seed);

bool IsIsomorphic(const Graph& a, const Graph& b);

// "u v" per line, '#' comments, blank lines ignored. Node count is
// max id + 1. Duplicate edges (in either direction) are merged; self-loops
// are rejected.
Graph ReadEdgeList(std::istream& in);
void WriteEdgeList(const Graph& g, std::ostream& out);

// Graphviz DOT rendering (undirected).
std::string ToDot(const Graph& g, std::string_view name = "G");

}  // namespace ctrlgraph

#endif  // CTRLGRAPH_GRAPH_HPP_
