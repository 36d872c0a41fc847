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

#include "ctrlgraph/evaluation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "json_io.hpp"
#include "parallel.hpp"

namespace ctrlgraph {

using internal::Json;

namespace {

using BoolMatrix = std::vector<std::vector<char>>;

BoolMatrix PaddedAdjacency(const Graph& g, std::size_t n) {
  BoolMatrix m(n, std::vector<char>(n, 0));
  for (auto [u, v] : g.edges()) m[u][v] = m[v][u] = 1;
  return m;
}

// Edge disagreements between a and b when node i of a is matched with
// node map[i] of b. Both matrices have the same size.
std::size_t EdgeMismatch(const BoolMatrix& a, const BoolMatrix& b,
                         const std::vector<std::size_t>& map) {
  std::size_t cost = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      cost += a[i][j] != b[map[i]][map[j]];
    }
  }
  return cost;
}

std::vector<std::size_t> ApproxAssignment(const BoolMatrix& a,
                                          const BoolMatrix& b) {
  const std::size_t n = a.size();
  auto degrees = [n](const BoolMatrix& m) {
    std::vector<std::int64_t> d(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i] += m[i][j];
    return d;
  };
  auto neighbour_degrees = [n](const BoolMatrix& m,
                               const std::vector<std::int64_t>& deg) {
    std::vector<std::vector<std::int64_t>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (m[i][j]) out[i].push_back(deg[j]);
      }
      std::sort(out[i].rbegin(), out[i].rend());
    }
    return out;
  };
  const auto da = degrees(a), db = degrees(b);
  const auto na = neighbour_degrees(a, da), nb = neighbour_degrees(b, db);
  std::vector<std::int64_t> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::int64_t c = std::abs(da[i] - db[j]);
      const std::size_t len = std::max(na[i].size(), nb[j].size());
      for (std::size_t k = 0; k < len; ++k) {
        const std::int64_t x = k < na[i].size() ? na[i][k] : 0;
        const std::int64_t y = k < nb[j].size() ? nb[j][k] : 0;
        c += std::abs(x - y);
      }
      cost[i * n + j] = c;
    }
  }
  return MinCostAssignment(cost, n);
}

class GedSearch {
 public:
  GedSearch(BoolMatrix a, BoolMatrix b, std::size_t real_b, std::size_t upper)
      : a_(std::move(a)), b_(std::move(b)), n_(a_.size()), real_b_(real_b),
        best_(upper), map_(n_), used_(n_, 0) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    std::vector<std::size_t> deg(n_, 0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) deg[i] += a_[i][j];
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t x, std::size_t y) { return deg[x] > deg[y]; });
  }

  std::size_t Run() {
    Search(0, 0);
    return best_;
  }

 private:
  // Admissible bound on the edge mismatches still to come once order_[0..k)
  // are placed: each placed pair must still reconcile its edge count
  // towards the unplaced side, and the unplaced blocks must reconcile their
  // internal edge counts.
  std::size_t LowerBound(std::size_t k) const {
    std::size_t bound = 0;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t ca = 0, cb = 0;
      for (std::size_t j = k; j < n_; ++j) ca += a_[order_[i]][order_[j]];
      for (std::size_t v = 0; v < n_; ++v) {
        if (!used_[v]) cb += b_[map_[i]][v];
      }
      bound += ca > cb ? ca - cb : cb - ca;
    }
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = k; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) ia += a_[order_[i]][order_[j]];
    for (std::size_t u = 0; u < n_; ++u) {
      if (used_[u]) continue;
      for (std::size_t v = u + 1; v < n_; ++v) {
        if (!used_[v]) ib += b_[u][v];
      }
    }
    return bound + (ia > ib ? ia - ib : ib - ia);
  }

  void Search(std::size_t k, std::size_t cost) {
    if (k == n_) {
      best_ = std::min(best_, cost);
      return;
    }
    bool dummy_tried = false;
    for (std::size_t v = 0; v < n_; ++v) {
      if (used_[v]) continue;
      // Padding nodes of b are interchangeable.
      if (v >= real_b_) {
        if (dummy_tried) continue;
        dummy_tried = true;
      }
      std::size_t delta = 0;
      for (std::size_t i = 0; i < k; ++i) {
        delta += a_[order_[i]][order_[k]] != b_[map_[i]][v];
      }
      if (cost + delta >= best_) continue;
      map_[k] = v;
      used_[v] = 1;
      if (cost + delta + LowerBound(k + 1) < best_) Search(k + 1, cost + delta);
      used_[v] = 0;
    }
  }

  BoolMatrix a_, b_;
  std::size_t n_, real_b_, best_;
  std::vector<std::size_t> order_, map_;
  std::vector<char> used_;
};

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

double KernelMean(std::span<const double> x, std::span<const double> y,
                  double inv_two_h2) {
  double acc = 0.0;
  for (double a : x) {
    for (double b : y) acc += std::exp(-(a - b) * (a - b) * inv_two_h2);
  }
  return acc / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

std::vector<std::size_t> IsoKey(const Graph& g) {
  std::vector<std::size_t> key = {g.num_nodes(), g.num_edges()};
  auto deg = g.DegreeSequence();
  key.insert(key.end(), deg.begin(), deg.end());
  return key;
}

}  // namespace

std::vector<double> LaplacianSpectrum(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return {};
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (auto [u, v] : g.edges()) {
    l(u, v) = l(v, u) = -1.0;
    l(u, u) += 1.0;
    l(v, v) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Laplacian eigensolver did not converge");
  }
  std::vector<double> out(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + n);
  std::sort(out.begin(), out.end());
  return out;
}

double SpectralDifference(const Graph& gt, const Graph& pred) {
  auto a = LaplacianSpectrum(gt);
  auto b = LaplacianSpectrum(pred);
  const std::size_t n = std::max(a.size(), b.size());
  if (n == 0) return 0.0;
  a.resize(n, 0.0);
  b.resize(n, 0.0);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc) / static_cast<double>(n);
}

std::vector<std::size_t> MinCostAssignment(std::span<const std::int64_t> cost,
                                           std::size_t n) {
  if (cost.size() != n * n) {
    throw std::invalid_argument("assignment cost matrix is not n x n");
  }
  if (n == 0) return {};
  // Shortest augmenting path with row/column potentials; 1-based with a
  // virtual column 0.
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<std::int64_t> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      std::int64_t delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

std::size_t GedApprox(const Graph& a, const Graph& b) {
  const std::size_t n = std::max(a.num_nodes(), b.num_nodes());
  const BoolMatrix ma = PaddedAdjacency(a, n), mb = PaddedAdjacency(b, n);
  const auto map = ApproxAssignment(ma, mb);
  const std::size_t node_cost = n - std::min(a.num_nodes(), b.num_nodes());
  return node_cost + EdgeMismatch(ma, mb, map);
}

std::size_t GedExact(const Graph& a, const Graph& b, std::size_t cap) {
  if (a.num_nodes() > cap || b.num_nodes() > cap) {
    throw std::invalid_argument("exact GED limited to " + std::to_string(cap) +
                                " nodes");
  }
  const std::size_t n = std::max(a.num_nodes(), b.num_nodes());
  const std::size_t node_cost = n - std::min(a.num_nodes(), b.num_nodes());
  BoolMatrix ma = PaddedAdjacency(a, n), mb = PaddedAdjacency(b, n);
  // Edge cost of the heuristic assignment, plus one so that an equally good
  // assignment is still explored and confirmed.
  const std::size_t upper = EdgeMismatch(ma, mb, ApproxAssignment(ma, mb)) + 1;
  GedSearch search(std::move(ma), std::move(mb), b.num_nodes(), upper);
  return node_cost + search.Run();
}

GedValue Ged(const Graph& a, const Graph& b, std::size_t cap) {
  if (a.num_nodes() <= cap && b.num_nodes() <= cap) {
    return {GedExact(a, b, cap), true};
  }
  return {GedApprox(a, b), false};
}

MadResult Mad(std::span<const AttributeVector> target,
              std::span<const AttributeVector> achieved) {
  if (target.empty() || target.size() != achieved.size()) {
    throw std::invalid_argument("MAD needs two nonempty lists of equal length");
  }
  MadResult r;
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
      acc += std::abs(target[k].values[i] - achieved[k].values[i]);
    }
    r.per_attribute[i] = acc / static_cast<double>(target.size());
  }
  r.overall = std::accumulate(r.per_attribute.begin(), r.per_attribute.end(),
                              0.0) /
              kNumAttributes;
  return r;
}

double MedianBandwidth(std::span<const double> x, std::span<const double> y) {
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::vector<double> dist;
  dist.reserve(pooled.size() * (pooled.size() - 1) / 2);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    for (std::size_t j = i + 1; j < pooled.size(); ++j) {
      dist.push_back(std::abs(pooled[i] - pooled[j]));
    }
  }
  const double h = Median(std::move(dist));
  return h > 0.0 ? h : 1.0;
}

double Mmd(std::span<const double> x, std::span<const double> y,
           double bandwidth) {
  if (x.empty() || y.empty()) {
    throw std::invalid_argument("MMD needs two nonempty samples");
  }
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  const double v =
      KernelMean(x, x, inv) + KernelMean(y, y, inv) - 2.0 * KernelMean(x, y, inv);
  return std::max(0.0, v);
}

double Mmd(std::span<const double> x, std::span<const double> y) {
  return Mmd(x, y, MedianBandwidth(x, y));
}

double Novelty(std::span<const Graph> generated,
               std::span<const Graph> training) {
  if (generated.empty()) {
    throw std::invalid_argument("novelty needs at least one generated graph");
  }
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < training.size(); ++i) {
    buckets[IsoKey(training[i])].push_back(i);
  }
  std::vector<char> novel(generated.size(), 1);
  internal::ParallelFor(generated.size(), [&](std::size_t k) {
    auto it = buckets.find(IsoKey(generated[k]));
    if (it == buckets.end()) return;
    for (std::size_t i : it->second) {
      if (IsIsomorphic(generated[k], training[i])) {
        novel[k] = 0;
        return;
      }
    }
  });
  const double count = std::accumulate(novel.begin(), novel.end(), 0.0);
  return count / static_cast<double>(generated.size());
}

std::string_view MetricName(Metric m) {
  switch (m) {
    case Metric::kSd:
      return "sd";
    case Metric::kGed:
      return "ged";
    case Metric::kMad:
      return "mad";
    case Metric::kMmd:
      return "mmd";
    case Metric::kNovelty:
      return "novelty";
  }
  return "sd";
}

std::vector<Metric> ParseMetrics(std::string_view list) {
  std::vector<Metric> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view item = list.substr(start, end - start);
    start = end + 1;
    if (item.empty()) continue;
    bool found = false;
    for (Metric m : {Metric::kSd, Metric::kGed, Metric::kMad, Metric::kMmd,
                     Metric::kNovelty}) {
      if (item == MetricName(m)) {
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
        found = true;
      }
    }
    if (!found) {
      throw std::invalid_argument("unknown metric: " + std::string(item));
    }
  }
  if (out.empty()) throw std::invalid_argument("no metrics selected");
  return out;
}

MetricReport Evaluate(const EvaluationInput& in,
                      std::span<const Metric> metrics, std::size_t ged_cap) {
  const std::size_t n = in.reference.size();
  if (n == 0 || in.generated.size() != n || in.targets.size() != n ||
      (!in.ids.empty() && in.ids.size() != n)) {
    throw std::invalid_argument(
        "evaluation needs equally sized, nonempty reference and generated "
        "lists");
  }
  auto wants = [&](Metric m) {
    return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
  };
  MetricReport r;
  r.metrics.assign(metrics.begin(), metrics.end());
  r.pairs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.pairs[i].id = in.ids.empty() ? std::to_string(i) : in.ids[i];
  }
  const bool sd = wants(Metric::kSd), ged = wants(Metric::kGed);
  if (sd || ged) {
    internal::ParallelFor(n, [&](std::size_t i) {
      if (sd) r.pairs[i].sd = SpectralDifference(in.reference[i], in.generated[i]);
      if (ged) r.pairs[i].ged = Ged(in.reference[i], in.generated[i], ged_cap);
    });
  }
  if (sd) {
    double acc = 0.0;
    for (const auto& p : r.pairs) acc += *p.sd;
    r.mean_sd = acc / static_cast<double>(n);
  }
  if (ged) {
    double acc = 0.0;
    for (const auto& p : r.pairs) {
      acc += static_cast<double>(p.ged->value);
      r.ged_exact_count += p.ged->exact;
    }
    r.mean_ged = acc / static_cast<double>(n);
  }
  if (wants(Metric::kMad) || wants(Metric::kMmd)) {
    std::vector<AttributeVector> achieved(n);
    internal::ParallelFor(n, [&](std::size_t i) {
      achieved[i] = ComputeAttributes(in.generated[i]);
    });
    if (wants(Metric::kMad)) r.mad = Mad(in.targets, achieved);
    if (wants(Metric::kMmd)) {
      std::array<double, kNumAttributes> per{};
      for (std::size_t a = 0; a < kNumAttributes; ++a) {
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
          x[i] = achieved[i].values[a];
          y[i] = in.targets[i].values[a];
        }
        per[a] = Mmd(x, y);
      }
      r.mmd = per;
      r.mean_mmd = std::accumulate(per.begin(), per.end(), 0.0) / kNumAttributes;
    }
  }
  if (wants(Metric::kNovelty)) r.novelty = Novelty(in.generated, in.training);
  return r;
}

std::string MetricReportToJson(const MetricReport& r) {
  Json metrics = Json::array();
  for (Metric m : r.metrics) metrics.push_back(MetricName(m));
  Json summary = Json::object();
  if (r.mean_sd) summary["sd_mean"] = *r.mean_sd;
  if (r.mean_ged) {
    summary["ged_mean"] = *r.mean_ged;
    summary["ged_exact_pairs"] = r.ged_exact_count;
    summary["ged_approx_pairs"] = r.pairs.size() - r.ged_exact_count;
  }
  auto per_attribute = [](const std::array<double, kNumAttributes>& v) {
    Json j = Json::object();
    for (std::size_t i = 0; i < kNumAttributes; ++i) {
      j[std::string(kAttributeNames[i])] = v[i];
    }
    return j;
  };
  if (r.mad) {
    summary["mad"] = {{"overall", r.mad->overall},
                      {"per_attribute", per_attribute(r.mad->per_attribute)}};
  }
  if (r.mmd) {
    summary["mmd"] = {{"mean", *r.mean_mmd},
                      {"per_attribute", per_attribute(*r.mmd)}};
  }
  if (r.novelty) summary["novelty"] = *r.novelty;
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    Json j{{"id", p.id}};
    if (p.sd) j["sd"] = *p.sd;
    if (p.ged) {
      j["ged"] = p.ged->value;
      j["ged_method"] = p.ged->exact ? "exact" : "approx";
    }
    pairs.push_back(std::move(j));
  }
  Json out{{"metrics", metrics}, {"summary", summary}, {"pairs", pairs}};
  return out.dump(2) + "\n";
}

}  // namespace ctrlgraph
