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

#include <algorithm>
#include <bit>
#include <deque>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ctrlgraph {

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

Edge Ordered(NodeId u, NodeId v) { return u < v ? Edge{u, v} : Edge{v, u}; }

}  // namespace

Graph::Graph(std::size_t num_nodes) : adj_(num_nodes) {}

Graph::Graph(std::size_t num_nodes, std::span<const Edge> edges)
    : adj_(num_nodes) {
  for (const auto& [u, v] : edges) {
    if (!AddEdge(u, v)) {
      throw std::invalid_argument("duplicate edge " + std::to_string(u) + "-" +
                                  std::to_string(v));
    }
  }
}

Graph Graph::Complete(std::size_t n) {
  Graph g(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) g.AddEdge(u, v);
  return g;
}

Graph Graph::Path(std::size_t n) {
  Graph g(n);
  for (NodeId u = 0; u + 1 < n; ++u) g.AddEdge(u, u + 1);
  return g;
}

Graph Graph::Cycle(std::size_t n) {
  Graph g = Path(n);
  if (n >= 3) g.AddEdge(0, static_cast<NodeId>(n - 1));
  return g;
}

Graph Graph::Star(std::size_t leaves) {
  Graph g(leaves + 1);
  for (NodeId v = 1; v <= leaves; ++v) g.AddEdge(0, v);
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= adj_.size() || v >= adj_.size()) return false;
  const auto& a = adj_[u];
  return std::binary_search(a.begin(), a.end(), v);
}

bool Graph::AddEdge(NodeId u, NodeId v) {
  if (u == v) throw std::invalid_argument("self-loop on node " + std::to_string(u));
  if (u >= adj_.size() || v >= adj_.size()) {
    throw std::invalid_argument("edge endpoint out of range");
  }
  Edge e = Ordered(u, v);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it != edges_.end() && *it == e) return false;
  edges_.insert(it, e);
  auto& au = adj_[u];
  au.insert(std::lower_bound(au.begin(), au.end(), v), v);
  auto& av = adj_[v];
  av.insert(std::lower_bound(av.begin(), av.end(), u), u);
  return true;
}

Graph Graph::Relabeled(std::span<const NodeId> perm) const {
  if (perm.size() != num_nodes()) {
    throw std::invalid_argument("permutation size mismatch");
  }
  std::vector<Edge> mapped;
  mapped.reserve(edges_.size());
  for (const auto& [u, v] : edges_) mapped.push_back(Ordered(perm[u], perm[v]));
  std::sort(mapped.begin(), mapped.end());
  Graph g(num_nodes());
  g.edges_ = mapped;
  for (const auto& [u, v] : mapped) {
    g.adj_[u].push_back(v);
    g.adj_[v].push_back(u);
  }
  for (auto& a : g.adj_) std::sort(a.begin(), a.end());
  if (std::adjacent_find(mapped.begin(), mapped.end()) != mapped.end()) {
    throw std::invalid_argument("relabeling is not a permutation");
  }
  return g;
}

Graph Graph::Induced(std::span<const NodeId> nodes) const {
  std::vector<NodeId> index(num_nodes(), std::numeric_limits<NodeId>::max());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    index[nodes[i]] = static_cast<NodeId>(i);
  }
  Graph g(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (NodeId w : adj_[nodes[i]]) {
      NodeId j = index[w];
      if (j != std::numeric_limits<NodeId>::max() && i < j) {
        g.AddEdge(static_cast<NodeId>(i), j);
      }
    }
  }
  return g;
}

std::vector<std::size_t> Graph::DegreeSequence() const {
  std::vector<std::size_t> d(num_nodes());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = adj_[v].size();
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

// ---------------------------------------------------------------------------
// Attribute names.

bool IsCountAttribute(Attr a) {
  switch (a) {
    case Attr::kDensity:
    case Attr::kClosenessCentrality:
    case Attr::kClusteringCoefficient:
    case Attr::kTransitivity:
      return false;
    default:
      return true;
  }
}

std::optional<Attr> AttributeFromName(std::string_view name) {
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    if (kAttributeNames[i] == name) return static_cast<Attr>(i);
  }
  return std::nullopt;
}

std::string_view AttributeName(Attr a) {
  return kAttributeNames[static_cast<std::size_t>(a)];
}

// ---------------------------------------------------------------------------
// Traversal helpers.

std::vector<std::size_t> BfsDistances(const Graph& g, NodeId source) {
  std::vector<std::size_t> dist(g.num_nodes(), kUnreached);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId w : g.neighbors(u)) {
      if (dist[w] == kUnreached) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::vector<std::size_t> ConnectedComponents(const Graph& g) {
  std::vector<std::size_t> label(g.num_nodes(), kUnreached);
  std::size_t next = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (label[s] != kUnreached) continue;
    std::vector<NodeId> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(u)) {
        if (label[w] == kUnreached) {
          label[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return label;
}

bool IsConnected(const Graph& g) {
  if (g.num_nodes() <= 1) return true;
  auto d = BfsDistances(g, 0);
  return std::none_of(d.begin(), d.end(),
                      [](std::size_t x) { return x == kUnreached; });
}

// ---------------------------------------------------------------------------
// Scalar attributes.

std::size_t CountLocalBridges(const Graph& g) {
  std::size_t count = 0;
  for (const auto& [u, v] : g.edges()) {
    const auto& a = g.neighbors(u);
    const auto& b = g.neighbors(v);
    bool common = false;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
      if (*i == *j) {
        common = true;
        break;
      }
      if (*i < *j) ++i; else ++j;
    }
    if (!common) ++count;
  }
  return count;
}

double Density(const Graph& g) {
  const double n = static_cast<double>(g.num_nodes());
  if (g.num_nodes() < 2) return 0.0;
  return static_cast<double>(g.num_edges()) / (n * (n - 1.0));
}

namespace {

// Unit-capacity augmenting-path max flow on a small residual network.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t n) : head_(n, -1) {}

  void AddArc(std::size_t u, std::size_t v, int cap) {
    arcs_.push_back({v, cap, head_[u]});
    head_[u] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({u, 0, head_[v]});
    head_[v] = static_cast<int>(arcs_.size()) - 1;
  }

  // Stops as soon as the flow reaches `limit`.
  std::size_t MaxFlow(std::size_t s, std::size_t t, std::size_t limit) {
    std::size_t flow = 0;
    std::vector<int> via(head_.size());
    while (flow < limit) {
      std::fill(via.begin(), via.end(), -2);
      via[s] = -1;
      std::deque<std::size_t> queue{s};
      while (!queue.empty() && via[t] == -2) {
        std::size_t u = queue.front();
        queue.pop_front();
        for (int a = head_[u]; a != -1; a = arcs_[a].next) {
          if (arcs_[a].cap > 0 && via[arcs_[a].to] == -2) {
            via[arcs_[a].to] = a;
            queue.push_back(arcs_[a].to);
          }
        }
      }
      if (via[t] == -2) break;
      for (std::size_t v = t; v != s;) {
        int a = via[v];
        arcs_[a].cap -= 1;
        arcs_[a ^ 1].cap += 1;
        v = arcs_[a ^ 1].to;
      }
      ++flow;
    }
    return flow;
  }

 private:
  struct Arc {
    std::size_t to;
    int cap;
    int next;
  };
  std::vector<int> head_;
  std::vector<Arc> arcs_;
};

std::size_t MinDegree(const Graph& g) {
  std::size_t d = std::numeric_limits<std::size_t>::max();
  for (NodeId v = 0; v < g.num_nodes(); ++v) d = std::min(d, g.degree(v));
  return d;
}

std::size_t LocalEdgeConnectivity(const Graph& g, NodeId s, NodeId t,
                                  std::size_t limit) {
  FlowNetwork net(g.num_nodes());
  for (const auto& [u, v] : g.edges()) {
    net.AddArc(u, v, 1);
    net.AddArc(v, u, 1);
  }
  return net.MaxFlow(s, t, limit);
}

// Node-disjoint s-t paths for non-adjacent s, t via node splitting:
// v_in = 2v, v_out = 2v + 1.
std::size_t LocalNodeConnectivity(const Graph& g, NodeId s, NodeId t,
                                  std::size_t limit) {
  const std::size_t n = g.num_nodes();
  const int big = static_cast<int>(n);
  FlowNetwork net(2 * n);
  for (NodeId v = 0; v < n; ++v) {
    net.AddArc(2 * v, 2 * v + 1, (v == s || v == t) ? big : 1);
  }
  for (const auto& [u, v] : g.edges()) {
    net.AddArc(2 * u + 1, 2 * v, big);
    net.AddArc(2 * v + 1, 2 * u, big);
  }
  return net.MaxFlow(2 * s + 1, 2 * t, limit);
}

}  // namespace

std::size_t EdgeConnectivity(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n < 2 || !IsConnected(g)) return 0;
  // Any global minimum cut separates node 0 from some other node.
  std::size_t best = MinDegree(g);
  for (NodeId t = 1; t < n && best > 0; ++t) {
    best = std::min(best, LocalEdgeConnectivity(g, 0, t, best));
  }
  return best;
}

std::size_t NodeConnectivity(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n < 2 || !IsConnected(g)) return 0;
  if (g.num_edges() == n * (n - 1) / 2) return n - 1;
  // Esfahanian-Hakimi: a minimum separator either avoids a minimum-degree
  // vertex v (then it separates v from a non-neighbor) or contains it (then
  // it separates two non-adjacent neighbors of v).
  NodeId v = 0;
  for (NodeId u = 1; u < n; ++u) {
    if (g.degree(u) < g.degree(v)) v = u;
  }
  std::size_t best = g.degree(v);
  for (NodeId w = 0; w < n; ++w) {
    if (w == v || g.has_edge(v, w)) continue;
    best = std::min(best, LocalNodeConnectivity(g, v, w, best));
  }
  const auto& nb = g.neighbors(v);
  for (std::size_t i = 0; i < nb.size(); ++i) {
    for (std::size_t j = i + 1; j < nb.size(); ++j) {
      if (g.has_edge(nb[i], nb[j])) continue;
      best = std::min(best, LocalNodeConnectivity(g, nb[i], nb[j], best));
    }
  }
  return best;
}

namespace {

class CliqueCounter {
 public:
  explicit CliqueCounter(const Graph& g) : g_(g) {}

  std::size_t Run() {
    std::vector<NodeId> p(g_.num_nodes());
    std::iota(p.begin(), p.end(), 0);
    Expand(std::move(p), {});
    return count_;
  }

 private:
  std::vector<NodeId> Intersect(const std::vector<NodeId>& set, NodeId v) const {
    std::vector<NodeId> out;
    const auto& nb = g_.neighbors(v);
    std::set_intersection(set.begin(), set.end(), nb.begin(), nb.end(),
                          std::back_inserter(out));
    return out;
  }

  // Bron-Kerbosch with Tomita pivoting; P and X sorted.
  void Expand(std::vector<NodeId> p, std::vector<NodeId> x) {
    if (p.empty()) {
      if (x.empty() && ++count_ > kMaxCliqueLimit) {
        throw std::runtime_error("maximal clique enumeration exceeded limit");
      }
      return;
    }
    NodeId pivot = p.front();
    std::size_t best = 0;
    for (const auto* set : {&p, &x}) {
      for (NodeId u : *set) {
        std::size_t k = Intersect(p, u).size();
        if (k > best) {
          best = k;
          pivot = u;
        }
      }
    }
    std::vector<NodeId> candidates;
    const auto& pn = g_.neighbors(pivot);
    std::set_difference(p.begin(), p.end(), pn.begin(), pn.end(),
                        std::back_inserter(candidates));
    for (NodeId v : candidates) {
      Expand(Intersect(p, v), Intersect(x, v));
      p.erase(std::lower_bound(p.begin(), p.end(), v));
      x.insert(std::lower_bound(x.begin(), x.end(), v), v);
    }
  }

  const Graph& g_;
  std::size_t count_ = 0;
};

}  // namespace

std::size_t CountMaximalCliques(const Graph& g) {
  return CliqueCounter(g).Run();
}

std::size_t Diameter(const Graph& g) {
  std::size_t diam = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    for (std::size_t d : BfsDistances(g, s)) {
      if (d != kUnreached) diam = std::max(diam, d);
    }
  }
  return diam;
}

namespace {

// Minimum-degree elimination, minimized over every tie choice so the result
// does not depend on node ids. The elimination graph after removing a set S
// does not depend on the order S was removed in, so the search memoizes on
// the remaining-vertex mask. Interchangeable candidates (twins) are expanded
// once.
class MinDegreeSearch {
 public:
  static constexpr std::size_t kStateBudget = 200'000;

  explicit MinDegreeSearch(const Graph& g) : n_(g.num_nodes()), adj_(n_, 0) {
    for (const auto& [u, v] : g.edges()) {
      adj_[u] |= Bit(v);
      adj_[v] |= Bit(u);
    }
  }

  std::size_t Run() {
    std::uint64_t all = n_ == 64 ? ~0ULL : (Bit(n_) - 1);
    return Best(all, adj_);
  }

 private:
  static std::uint64_t Bit(std::size_t i) { return 1ULL << i; }

  std::size_t Best(std::uint64_t remaining, const std::vector<std::uint64_t>& adj) {
    const std::size_t r = static_cast<std::size_t>(std::popcount(remaining));
    if (r == 0) return 0;
    if (auto it = memo_.find(remaining); it != memo_.end()) return it->second;

    std::size_t md = std::numeric_limits<std::size_t>::max();
    for (std::uint64_t m = remaining; m; m &= m - 1) {
      int v = std::countr_zero(m);
      md = std::min<std::size_t>(md, std::popcount(adj[v]));
    }
    // A clique is eliminated at width r - 1 whatever the order.
    if (md == r - 1) return memo_[remaining] = r - 1;

    std::vector<int> reps;
    for (std::uint64_t m = remaining; m; m &= m - 1) {
      int v = std::countr_zero(m);
      if (static_cast<std::size_t>(std::popcount(adj[v])) != md) continue;
      bool twin = std::any_of(reps.begin(), reps.end(), [&](int u) {
        return (adj[u] & ~Bit(v)) == (adj[v] & ~Bit(u));
      });
      if (!twin) reps.push_back(v);
    }

    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (int v : reps) {
      std::vector<std::uint64_t> next = adj;
      std::uint64_t nb = adj[v];
      for (std::uint64_t m = nb; m; m &= m - 1) {
        int u = std::countr_zero(m);
        next[u] = (next[u] | nb) & ~Bit(u) & ~Bit(v);
      }
      next[v] = 0;
      best = std::min(best, std::max(md, Best(remaining & ~Bit(v), next)));
      // md is a lower bound for this state; past the budget take the first
      // branch only.
      if (best == md || memo_.size() > kStateBudget) break;
    }
    return memo_[remaining] = best;
  }

  std::size_t n_;
  std::vector<std::uint64_t> adj_;
  std::unordered_map<std::uint64_t, std::size_t> memo_;
};

// Fallback for graphs too large for the mask search: lowest id on ties.
std::size_t GreedyMinDegree(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [u, v] : g.edges()) {
    adj[u][v] = adj[v][u] = true;
    ++deg[u];
    ++deg[v];
  }
  std::vector<bool> alive(n, true);
  std::size_t width = 0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t v = n;
    for (std::size_t u = 0; u < n; ++u) {
      if (alive[u] && (v == n || deg[u] < deg[v])) v = u;
    }
    width = std::max(width, deg[v]);
    std::vector<std::size_t> nb;
    for (std::size_t u = 0; u < n; ++u)
      if (alive[u] && adj[v][u]) nb.push_back(u);
    for (std::size_t a : nb) {
      adj[a][v] = false;
      --deg[a];
      for (std::size_t b : nb) {
        if (a != b && !adj[a][b]) {
          adj[a][b] = true;
          ++deg[a];
        }
      }
    }
    alive[v] = false;
  }
  return width;
}

}  // namespace

std::size_t TreewidthMinDegree(const Graph& g) {
  if (g.num_nodes() <= 64) return MinDegreeSearch(g).Run();
  return GreedyMinDegree(g);
}

namespace {

// Sums per-node terms in sorted order so that the result is bit-identical
// under node relabeling.
double OrderFreeMean(std::vector<double> terms) {
  if (terms.empty()) return 0.0;
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total / static_cast<double>(terms.size());
}

}  // namespace

double ClosenessCentrality(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> terms(n, 0.0);
  for (NodeId s = 0; s < n; ++s) {
    std::size_t reachable = 0;
    std::size_t dist_sum = 0;
    for (std::size_t d : BfsDistances(g, s)) {
      if (d == kUnreached) continue;
      ++reachable;
      dist_sum += d;
    }
    if (dist_sum > 0) {
      terms[s] = static_cast<double>(reachable - 1) /
                 static_cast<double>(dist_sum);
    }
  }
  return OrderFreeMean(std::move(terms));
}

namespace {

std::size_t TrianglesAt(const Graph& g, NodeId v) {
  const auto& nb = g.neighbors(v);
  std::size_t t = 0;
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j)
      if (g.has_edge(nb[i], nb[j])) ++t;
  return t;
}

}  // namespace

double AverageClustering(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> terms(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    const double k = static_cast<double>(g.degree(v));
    if (g.degree(v) < 2) continue;
    terms[v] = 2.0 * static_cast<double>(TrianglesAt(g, v)) / (k * (k - 1.0));
  }
  return OrderFreeMean(std::move(terms));
}

double Transitivity(const Graph& g) {
  // Sum over nodes of closed / connected triples centered at the node; each
  // triangle is seen three times, matching 3 * |triangles|.
  std::size_t closed = 0;
  std::size_t triads = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const std::size_t k = g.degree(v);
    closed += TrianglesAt(g, v);
    if (k >= 2) triads += k * (k - 1) / 2;
  }
  if (triads == 0) return 0.0;
  return static_cast<double>(closed) / static_cast<double>(triads);
}

AttributeVector ComputeAttributes(const Graph& g) {
  AttributeVector c;
  c[Attr::kNodes] = static_cast<double>(g.num_nodes());
  c[Attr::kEdges] = static_cast<double>(g.num_edges());
  c[Attr::kLocalBridges] = static_cast<double>(CountLocalBridges(g));
  c[Attr::kDensity] = Density(g);
  c[Attr::kEdgeConnectivity] = static_cast<double>(EdgeConnectivity(g));
  c[Attr::kNodeConnectivity] = static_cast<double>(NodeConnectivity(g));
  c[Attr::kMaxCliques] = static_cast<double>(CountMaximalCliques(g));
  c[Attr::kDiameter] = static_cast<double>(Diameter(g));
  c[Attr::kTreewidthMinDegree] = static_cast<double>(TreewidthMinDegree(g));
  c[Attr::kClosenessCentrality] = ClosenessCentrality(g);
  c[Attr::kClusteringCoefficient] = AverageClustering(g);
  c[Attr::kTransitivity] = Transitivity(g);
  return c;
}

// ---------------------------------------------------------------------------
// Canonical ordering.

std::vector<NodeId> BfsCanonicalOrder(const Graph& g) {
  const std::size_t n = g.num_nodes();
  auto comp = ConnectedComponents(g);
  const std::size_t num_comp =
      n == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<NodeId> roots(num_comp, std::numeric_limits<NodeId>::max());
  for (NodeId v = 0; v < n; ++v) {
    NodeId& r = roots[comp[v]];
    if (r == std::numeric_limits<NodeId>::max() || g.degree(v) > g.degree(r)) {
      r = v;
    }
  }
  // Global root first, then the remaining components by root id.
  std::sort(roots.begin(), roots.end());
  if (!roots.empty()) {
    auto global = std::min_element(roots.begin(), roots.end(),
                                   [&](NodeId a, NodeId b) {
                                     if (g.degree(a) != g.degree(b))
                                       return g.degree(a) > g.degree(b);
                                     return a < b;
                                   });
    std::rotate(roots.begin(), global, global + 1);
  }

  std::vector<NodeId> order;
  order.reserve(n);
  std::vector<bool> seen(n, false);
  for (NodeId root : roots) {
    std::deque<NodeId> queue{root};
    seen[root] = true;
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (NodeId w : g.neighbors(u)) {
        if (!seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
      }
    }
  }
  return order;
}

Graph BfsCanonicalize(const Graph& g) {
  auto order = BfsCanonicalOrder(g);
  std::vector<NodeId> perm(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    perm[order[i]] = static_cast<NodeId>(i);
  }
  return g.Relabeled(perm);
}

// ---------------------------------------------------------------------------
// Random graphs.

Graph BarabasiAlbert(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m < 1 || m >= n) {
    throw std::invalid_argument("barabasi_albert requires 1 <= m < n");
  }
  std::mt19937_64 rng(seed);
  Graph g(n);
  // Each endpoint appears once per incident edge, so a uniform pick from this
  // list is a degree-proportional pick.
  std::vector<NodeId> endpoints;
  for (NodeId v = static_cast<NodeId>(m); v < n; ++v) {
    std::vector<NodeId> targets;
    while (targets.size() < m) {
      NodeId t;
      if (endpoints.empty()) {
        t = std::uniform_int_distribution<NodeId>(0, v - 1)(rng);
      } else {
        t = endpoints[std::uniform_int_distribution<std::size_t>(
            0, endpoints.size() - 1)(rng)];
      }
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
        targets.push_back(t);
      }
    }
    for (NodeId t : targets) {
      g.AddEdge(v, t);
      endpoints.push_back(v);
      endpoints.push_back(t);
    }
  }
  return g;
}

Graph ErdosRenyi(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("erdos_renyi requires 0 <= p <= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Graph g(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (unit(rng) < p) g.AddEdge(u, v);
  return g;
}

// ---------------------------------------------------------------------------
// Isomorphism.

namespace {

// Joint color refinement of two graphs with a shared color table.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> RefineColors(
    const Graph& a, const Graph& b) {
  std::vector<std::size_t> ca(a.num_nodes()), cb(b.num_nodes());
  for (NodeId v = 0; v < a.num_nodes(); ++v) ca[v] = a.degree(v);
  for (NodeId v = 0; v < b.num_nodes(); ++v) cb[v] = b.degree(v);
  std::size_t classes = 0;
  for (std::size_t round = 0; round <= a.num_nodes(); ++round) {
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t> table;
    auto signature = [&](const Graph& g, const std::vector<std::size_t>& c,
                         NodeId v) {
      std::vector<std::size_t> nb;
      for (NodeId w : g.neighbors(v)) nb.push_back(c[w]);
      std::sort(nb.begin(), nb.end());
      return std::make_pair(c[v], std::move(nb));
    };
    std::vector<std::size_t> na(ca.size()), nb(cb.size());
    for (NodeId v = 0; v < a.num_nodes(); ++v) {
      na[v] = table.try_emplace(signature(a, ca, v), table.size()).first->second;
    }
    for (NodeId v = 0; v < b.num_nodes(); ++v) {
      nb[v] = table.try_emplace(signature(b, cb, v), table.size()).first->second;
    }
    ca = std::move(na);
    cb = std::move(nb);
    if (table.size() == classes) break;
    classes = table.size();
  }
  return {ca, cb};
}

class IsoMatcher {
 public:
  IsoMatcher(const Graph& a, const Graph& b) : a_(a), b_(b) {
    std::tie(color_a_, color_b_) = RefineColors(a, b);
    // Match rare colors first, keeping each step adjacent to earlier ones
    // where possible.
    std::map<std::size_t, std::size_t> freq;
    for (auto c : color_a_) ++freq[c];
    std::vector<bool> placed(a.num_nodes(), false);
    while (order_.size() < a.num_nodes()) {
      NodeId best = 0;
      bool have = false;
      std::size_t best_links = 0;
      for (NodeId v = 0; v < a.num_nodes(); ++v) {
        if (placed[v]) continue;
        std::size_t links = 0;
        for (NodeId w : a.neighbors(v)) links += placed[w] ? 1 : 0;
        if (!have || links > best_links ||
            (links == best_links && freq[color_a_[v]] < freq[color_a_[best]])) {
          best = v;
          best_links = links;
          have = true;
        }
      }
      placed[best] = true;
      order_.push_back(best);
    }
  }

  bool Run() {
    auto sa = color_a_;
    auto sb = color_b_;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
    map_.assign(a_.num_nodes(), kNone);
    used_.assign(b_.num_nodes(), false);
    return Extend(0);
  }

 private:
  static constexpr NodeId kNone = std::numeric_limits<NodeId>::max();

  bool Extend(std::size_t depth) {
    if (depth == order_.size()) return true;
    NodeId u = order_[depth];
    for (NodeId c = 0; c < b_.num_nodes(); ++c) {
      if (used_[c] || color_b_[c] != color_a_[u]) continue;
      bool ok = true;
      for (std::size_t i = 0; i < depth && ok; ++i) {
        NodeId x = order_[i];
        ok = a_.has_edge(u, x) == b_.has_edge(c, map_[x]);
      }
      if (!ok) continue;
      map_[u] = c;
      used_[c] = true;
      if (Extend(depth + 1)) return true;
      used_[c] = false;
      map_[u] = kNone;
    }
    return false;
  }

  const Graph& a_;
  const Graph& b_;
  std::vector<std::size_t> color_a_, color_b_;
  std::vector<NodeId> order_;
  std::vector<NodeId> map_;
  std::vector<bool> used_;
};

}  // namespace

bool IsIsomorphic(const Graph& a, const Graph& b) {
  if (a.num_nodes() != b.num_nodes() || a.num_edges() != b.num_edges()) {
    return false;
  }
  if (a.DegreeSequence() != b.DegreeSequence()) return false;
  return IsoMatcher(a, b).Run();
}

// ---------------------------------------------------------------------------
// Text I/O.

Graph ReadEdgeList(std::istream& in) {
  std::vector<Edge> edges;
  std::size_t max_id = 0;
  bool any = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long u = -1, v = -1;
    if (!(ls >> u >> v) || u < 0 || v < 0) {
      throw std::runtime_error("malformed edge on line " +
                               std::to_string(line_no));
    }
    if (u == v) {
      throw std::runtime_error("self-loop on line " + std::to_string(line_no));
    }
    edges.push_back(Ordered(static_cast<NodeId>(u), static_cast<NodeId>(v)));
    max_id = std::max<std::size_t>(max_id, static_cast<std::size_t>(std::max(u, v)));
    any = true;
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Graph(any ? max_id + 1 : 0, edges);
}

void WriteEdgeList(const Graph& g, std::ostream& out) {
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

std::string ToDot(const Graph& g, std::string_view name) {
  std::ostringstream out;
  out << "graph \"" << name << "\" {\n";
  for (NodeId v = 0; v < g.num_nodes(); ++v) out << "  " << v << ";\n";
  for (const auto& [u, v] : g.edges()) out << "  " << u << " -- " << v << ";\n";
  out << "}\n";
  return out.str();
}

}  // namespace ctrlgraph
