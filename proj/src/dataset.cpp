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

#include "ctrlgraph/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json_io.hpp"
#include "parallel.hpp"

namespace ctrlgraph {

using internal::Json;

std::string_view NodeOrderName(NodeOrder order) {
  return order == NodeOrder::kBfs ? "bfs" : "as-is";
}

NodeOrder ParseNodeOrder(std::string_view name) {
  if (name == "as-is") return NodeOrder::kAsIs;
  if (name == "bfs") return NodeOrder::kBfs;
  throw std::invalid_argument("unknown node order '" + std::string(name) +
                              "' (expected as-is or bfs)");
}

void DatasetConfig::Validate() const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (max_nodes < 1) throw std::invalid_argument("max_nodes must be >= 1");
  double sum = 0.0;
  for (double f : split_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw std::invalid_argument("split fractions must lie in [0, 1]");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
}

GraphRecord MakeRecord(std::string id, Graph graph) {
  AttributeVector c = ComputeAttributes(graph);
  return GraphRecord{std::move(id), std::move(graph), c};
}

Extraction ExtractKHopSubgraphs(const Graph& source, const DatasetConfig& cfg) {
  cfg.Validate();
  const std::size_t n = source.num_nodes();
  std::vector<std::optional<GraphRecord>> slots(n);
  internal::ParallelFor(n, [&](std::size_t center) {
    auto dist = BfsDistances(source, static_cast<NodeId>(center));
    std::vector<NodeId> members;
    for (NodeId v = 0; v < n; ++v) {
      if (dist[v] <= cfg.k) members.push_back(v);
    }
    if (members.size() > cfg.max_nodes) return;
    Graph sub = source.Induced(members);
    if (cfg.node_order == NodeOrder::kBfs) sub = BfsCanonicalize(sub);
    slots[center] = MakeRecord("hop" + std::to_string(cfg.k) + "-" +
                                   std::to_string(center),
                               std::move(sub));
  });
  Extraction out;
  for (auto& s : slots) {
    if (s) {
      out.records.push_back(std::move(*s));
    } else {
      ++out.discarded;
    }
  }
  return out;
}

std::array<std::size_t, 3> SplitSizes(std::size_t n,
                                      const std::array<double, 3>& fractions) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    // The epsilon keeps products like 0.29 * 100 from flooring to 28.
    const double exact = fractions[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> rank = {0, 1, 2};
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % 3, ++assigned) {
    ++sizes[rank[i]];
  }
  return sizes;
}

Splits SplitDataset(std::vector<GraphRecord> records, const DatasetConfig& cfg) {
  cfg.Validate();
  if (records.empty()) throw std::invalid_argument("no records to split");
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(records.begin(), records.end(), rng);
  auto sizes = SplitSizes(records.size(), cfg.split_fractions);
  Splits out;
  auto it = std::make_move_iterator(records.begin());
  out.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  out.val.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  out.test.assign(it, std::make_move_iterator(records.end()));
  return out;
}

NormStats FitNormStats(std::span<const GraphRecord> train) {
  if (train.empty()) throw std::invalid_argument("empty training split");
  NormStats s;
  const double n = static_cast<double>(train.size());
  // Accumulate offsets from the first record so constant columns come back
  // exactly.
  const auto& ref = train.front().attributes.values;
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    double acc = 0.0;
    for (const auto& r : train) acc += r.attributes.values[i] - ref[i];
    s.mean[i] = ref[i] + acc / n;
  }
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    double acc = 0.0;
    for (const auto& r : train) {
      const double d = r.attributes.values[i] - s.mean[i];
      acc += d * d;
    }
    s.std[i] = std::max(std::sqrt(acc / n), NormStats::kStdFloor);
  }
  return s;
}

NormalizedAttributes Normalize(const AttributeVector& c, const NormStats& s) {
  NormalizedAttributes z;
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    z[i] = (c.values[i] - s.mean[i]) / s.std[i];
  }
  return z;
}

AttributeVector Denormalize(const NormalizedAttributes& z, const NormStats& s) {
  AttributeVector c;
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    c.values[i] = z[i] * s.std[i] + s.mean[i];
  }
  return c;
}

std::vector<double> PadAdjacency(const Graph& g, std::size_t max_nodes) {
  if (g.num_nodes() > max_nodes) {
    throw std::invalid_argument("graph with " + std::to_string(g.num_nodes()) +
                                " nodes exceeds max_nodes " +
                                std::to_string(max_nodes));
  }
  std::vector<double> m(max_nodes * max_nodes, 0.0);
  for (const auto& [u, v] : g.edges()) {
    m[u * max_nodes + v] = 1.0;
    m[v * max_nodes + u] = 1.0;
  }
  return m;
}

Graph UnpadAdjacency(std::span<const double> matrix, std::size_t max_nodes,
                     std::size_t num_nodes) {
  if (matrix.size() != max_nodes * max_nodes || num_nodes > max_nodes) {
    throw std::invalid_argument("adjacency matrix shape mismatch");
  }
  Graph g(num_nodes);
  for (NodeId u = 0; u < num_nodes; ++u)
    for (NodeId v = u + 1; v < num_nodes; ++v)
      if (matrix[u * max_nodes + v] > 0.5) g.AddEdge(u, v);
  return g;
}

// ---------------------------------------------------------------------------
// Serialization.

namespace internal {

Json AttributesToJson(const AttributeVector& c) {
  Json j = Json::object();
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    const auto a = static_cast<Attr>(i);
    const double v = c.values[i];
    if (IsCountAttribute(a) && v == std::round(v) && std::abs(v) < 9e15) {
      j[std::string(kAttributeNames[i])] = static_cast<std::int64_t>(v);
    } else {
      j[std::string(kAttributeNames[i])] = v;
    }
  }
  return j;
}

AttributeVector AttributesFromJson(const Json& j) {
  if (!j.is_object()) throw std::runtime_error("attributes must be an object");
  AttributeVector c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto a = AttributeFromName(it.key());
    if (!a) throw std::runtime_error("unknown attribute '" + it.key() + "'");
  }
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    const std::string name(kAttributeNames[i]);
    if (!j.contains(name) || !j[name].is_number()) {
      throw std::runtime_error("attribute '" + name + "' missing or not numeric");
    }
    c.values[i] = j[name].get<double>();
  }
  return c;
}

Json NormStatsToJson(const NormStats& s) {
  Json mean = Json::object(), std = Json::object();
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    mean[std::string(kAttributeNames[i])] = s.mean[i];
    std[std::string(kAttributeNames[i])] = s.std[i];
  }
  return Json{{"mean", mean}, {"std", std}};
}

NormStats NormStatsFromJson(const Json& j) {
  NormStats s;
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    const std::string name(kAttributeNames[i]);
    s.mean[i] = j.at("mean").at(name).get<double>();
    s.std[i] = j.at("std").at(name).get<double>();
  }
  return s;
}

Json DatasetConfigToJson(const DatasetConfig& c) {
  return Json{{"k", c.k},
              {"max_nodes", c.max_nodes},
              {"split_fractions", c.split_fractions},
              {"seed", c.seed},
              {"node_order", NodeOrderName(c.node_order)}};
}

DatasetConfig DatasetConfigFromJson(const Json& j) {
  DatasetConfig c;
  c.k = j.at("k").get<std::size_t>();
  c.max_nodes = j.at("max_nodes").get<std::size_t>();
  c.split_fractions = j.at("split_fractions").get<std::array<double, 3>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.node_order = ParseNodeOrder(j.at("node_order").get<std::string>());
  return c;
}

}  // namespace internal

std::string RecordToLine(const GraphRecord& r) {
  Json edges = Json::array();
  for (const auto& [u, v] : r.graph.edges()) edges.push_back({u, v});
  Json j{{"id", r.id},
         {"num_nodes", r.graph.num_nodes()},
         {"edges", edges},
         {"attributes", internal::AttributesToJson(r.attributes)}};
  return j.dump();
}

GraphRecord RecordFromLine(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
    GraphRecord r;
    r.id = j.at("id").get<std::string>();
    const auto n = j.at("num_nodes").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) {
        throw std::runtime_error("edge must be a [u, v] pair");
      }
      edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    r.graph = Graph(n, edges);
    r.attributes = j.contains("attributes")
                       ? internal::AttributesFromJson(j["attributes"])
                       : ComputeAttributes(r.graph);
    return r;
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("malformed record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed record: ") + e.what());
  }
}

void WriteRecords(const std::filesystem::path& path,
                  std::span<const GraphRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << RecordToLine(r) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<GraphRecord> ReadRecords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<GraphRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(RecordFromLine(line));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return records;
}

Dataset BuildDatasetFromRecords(std::vector<GraphRecord> records,
                                const DatasetConfig& cfg) {
  Dataset d;
  d.config = cfg;
  d.splits = SplitDataset(std::move(records), cfg);
  d.stats = FitNormStats(d.splits.train);
  return d;
}

Dataset BuildDataset(const Graph& source, const DatasetConfig& cfg) {
  auto ex = ExtractKHopSubgraphs(source, cfg);
  if (ex.records.empty()) {
    throw std::invalid_argument("every k-hop subgraph exceeded max_nodes");
  }
  Dataset d = BuildDatasetFromRecords(std::move(ex.records), cfg);
  d.discarded = ex.discarded;
  return d;
}

void SaveDataset(const Dataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteRecords(dir / "train.jsonl", d.splits.train);
  WriteRecords(dir / "val.jsonl", d.splits.val);
  WriteRecords(dir / "test.jsonl", d.splits.test);
  Json stats{{"config", internal::DatasetConfigToJson(d.config)},
             {"norm_stats", internal::NormStatsToJson(d.stats)},
             {"counts",
              {{"train", d.splits.train.size()},
               {"val", d.splits.val.size()},
               {"test", d.splits.test.size()},
               {"discarded", d.discarded}}}};
  std::ofstream out(dir / "stats.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write stats.json");
  out << stats.dump(2) << '\n';
}

Dataset LoadDataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "stats.json", std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + (dir / "stats.json").string());
  Dataset d;
  try {
    Json stats = Json::parse(in);
    d.config = internal::DatasetConfigFromJson(stats.at("config"));
    d.stats = internal::NormStatsFromJson(stats.at("norm_stats"));
    d.discarded = stats.at("counts").value("discarded", std::size_t{0});
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("malformed stats.json: ") + e.what());
  }
  d.splits.train = ReadRecords(dir / "train.jsonl");
  d.splits.val = ReadRecords(dir / "val.jsonl");
  d.splits.test = ReadRecords(dir / "test.jsonl");
  return d;
}

}  // namespace ctrlgraph
