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

#ifndef CTRLGRAPH_DATASET_HPP_
#define CTRLGRAPH_DATASET_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlgraph/graph.hpp"

namespace ctrlgraph {

enum class NodeOrder { kAsIs, kBfs };

std::string_view NodeOrderName(NodeOrder order);
NodeOrder ParseNodeOrder(std::string_view name);

struct DatasetConfig {
  std::size_t k = 2;
  std::size_t max_nodes = 50;
  std::array<double, 3> split_fractions = {0.9, 0.05, 0.05};
  std::uint64_t seed = 0;
  NodeOrder node_order = NodeOrder::kAsIs;

  // Throws std::invalid_argument describing the first violated constraint.
  void Validate() const;
};

struct GraphRecord {
  std::string id;
  Graph graph;
  AttributeVector attributes;
};

GraphRecord MakeRecord(std::string id, Graph graph);

using NormalizedAttributes = std::array<double, kNumAttributes>;

struct NormStats {
  static constexpr double kStdFloor = 1e-6;
  std::array<double, kNumAttributes> mean{};
  std::array<double, kNumAttributes> std{};
};

struct Extraction {
  std::vector<GraphRecord> records;
  std::size_t discarded = 0;  // subgraphs above max_nodes
};

// One record per source node: the subgraph induced by every node within k
// hops, ids compacted in ascending source-id order (or BFS-canonicalized).
Extraction ExtractKHopSubgraphs(const Graph& source, const DatasetConfig& cfg);

struct Splits {
  std::vector<GraphRecord> train;
  std::vector<GraphRecord> val;
  std::vector<GraphRecord> test;
};

// Floor each fraction * n, then hand the leftover records one at a time to
// the splits with the largest fractional remainders (ties to the earlier
// split).
std::array<std::size_t, 3> SplitSizes(std::size_t n,
                                      const std::array<double, 3>& fractions);
Splits SplitDataset(std::vector<GraphRecord> records, const DatasetConfig& cfg);

NormStats FitNormStats(std::span<const GraphRecord> train);
NormalizedAttributes Normalize(const AttributeVector& c, const NormStats& s);
AttributeVector Denormalize(const NormalizedAttributes& z, const NormStats& s);

// Dense row-major max_nodes x max_nodes 0/1 matrix. Throws
// std::invalid_argument if the graph does not fit.
std::vector<double> PadAdjacency(const Graph& g, std::size_t max_nodes);
// Reads the top-left num_nodes block back (entries > 0.5 are edges).
Graph UnpadAdjacency(std::span<const double> matrix, std::size_t max_nodes,
                     std::size_t num_nodes);

// Line-oriented record files: one JSON object per line.
std::string RecordToLine(const GraphRecord& r);
// Throws std::runtime_error on malformed input. Attributes are recomputed
// when absent.
GraphRecord RecordFromLine(std::string_view line);
void WriteRecords(const std::filesystem::path& path,
                  std::span<const GraphRecord> records);
std::vector<GraphRecord> ReadRecords(const std::filesystem::path& path);

struct Dataset {
  DatasetConfig config;
  NormStats stats;
  Splits splits;
  std::size_t discarded = 0;
};

Dataset BuildDataset(const Graph& source, const DatasetConfig& cfg);
Dataset BuildDatasetFromRecords(std::vector<GraphRecord> records,
                                const DatasetConfig& cfg);

// Layout: train.jsonl, val.jsonl, test.jsonl, stats.json.
void SaveDataset(const Dataset& d, const std::filesystem::path& dir);
Dataset LoadDataset(const std::filesystem::path& dir);

}  // namespace ctrlgraph

#endif  // CTRLGRAPH_DATASET_HPP_
