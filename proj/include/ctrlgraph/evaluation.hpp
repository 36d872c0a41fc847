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

#ifndef CTRLGRAPH_EVALUATION_HPP_
#define CTRLGRAPH_EVALUATION_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlgraph/graph.hpp"

namespace ctrlgraph {

// Eigenvalues of L = D - A, ascending.
std::vector<double> LaplacianSpectrum(const Graph& g);

// (1/n) ||lambda_gt - lambda_pred||_2 after zero-padding both spectra to
// n = max(|V_gt|, |V_pred|) and re-sorting ascending.
double SpectralDifference(const Graph& gt, const Graph& pred);

inline constexpr std::size_t kGedExactCap = 8;

// Minimum number of unit-cost node and edge insertions/deletions turning a
// into b. Throws std::invalid_argument if either graph exceeds `cap` nodes.
std::size_t GedExact(const Graph& a, const Graph& b,
                     std::size_t cap = kGedExactCap);

// Upper bound on the edit distance from a min-cost node assignment
// (degree plus neighbour-degree mismatch), costed exactly under that
// assignment.
std::size_t GedApprox(const Graph& a, const Graph& b);

struct GedValue {
  std::size_t value = 0;
  bool exact = false;
};
// Exact when both graphs fit under `cap`, approximate otherwise.
GedValue Ged(const Graph& a, const Graph& b, std::size_t cap = kGedExactCap);

// Minimum-cost perfect assignment for a square cost matrix given row-major.
// Returns assignment[row] = column.
std::vector<std::size_t> MinCostAssignment(std::span<const std::int64_t> cost,
                                           std::size_t n);

struct MadResult {
  std::array<double, kNumAttributes> per_attribute{};
  double overall = 0.0;
};
// Mean absolute difference per attribute in raw units; overall is the mean
// over the twelve attributes. Throws std::invalid_argument if the inputs are
// empty or of different lengths.
MadResult Mad(std::span<const AttributeVector> target,
              std::span<const AttributeVector> achieved);

// Median of pairwise distances over x and y pooled (1.0 if that is 0).
double MedianBandwidth(std::span<const double> x, std::span<const double> y);
// Biased squared MMD with a Gaussian kernel of the given bandwidth, clamped
// at 0.
double Mmd(std::span<const double> x, std::span<const double> y,
           double bandwidth);
// Same with the median bandwidth.
double Mmd(std::span<const double> x, std::span<const double> y);

// Fraction of generated graphs isomorphic to no training graph. Throws
// std::invalid_argument if `generated` is empty.
double Novelty(std::span<const Graph> generated,
               std::span<const Graph> training);

enum class Metric { kSd, kGed, kMad, kMmd, kNovelty };
std::string_view MetricName(Metric m);
// Comma-separated names; throws std::invalid_argument on unknown names.
std::vector<Metric> ParseMetrics(std::string_view list);

struct PairMetrics {
  std::string id;
  std::optional<double> sd;
  std::optional<GedValue> ged;
};

struct MetricReport {
  std::vector<Metric> metrics;
  std::vector<PairMetrics> pairs;
  std::optional<double> mean_sd;
  std::optional<double> mean_ged;
  std::size_t ged_exact_count = 0;
  std::optional<MadResult> mad;
  std::optional<std::array<double, kNumAttributes>> mmd;
  std::optional<double> mean_mmd;
  std::optional<double> novelty;
};

struct EvaluationInput {
  std::span<const std::string> ids;
  std::span<const Graph> reference;  // ground-truth graphs
  std::span<const AttributeVector> targets;
  std::span<const Graph> generated;  // one per reference graph
  std::span<const Graph> training;   // for novelty
};

// Pairwise metrics run in parallel across pairs.
MetricReport Evaluate(const EvaluationInput& input,
                      std::span<const Metric> metrics,
                      std::size_t ged_cap = kGedExactCap);

std::string MetricReportToJson(const MetricReport& report);

}  // namespace ctrlgraph

#endif  // CTRLGRAPH_EVALUATION_HPP_
