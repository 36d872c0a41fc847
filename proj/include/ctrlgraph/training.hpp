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

#ifndef CTRLGRAPH_TRAINING_HPP_
#define CTRLGRAPH_TRAINING_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ctrlgraph/autodiff.hpp"
#include "ctrlgraph/dataset.hpp"
#include "ctrlgraph/model.hpp"

namespace ctrlgraph {

struct TrainingConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 1024;
  double learning_rate = 1e-3;
  LossWeights weights;
  SchedulerConfig scheduler;
  std::uint64_t seed = 0;
  std::array<bool, kNumAttributes> enabled_attributes = {
      true, true, true, true, true, true, true, true, true, true, true, true};

  void Validate() const;
  // 1.0 for enabled attributes, 0.0 otherwise.
  std::vector<double> AttributeMask() const;
  bool enabled(Attr a) const {
    return enabled_attributes[static_cast<std::size_t>(a)];
  }
};

// Parses a comma-separated list of attribute names. Throws
// std::invalid_argument on unknown names.
std::vector<Attr> ParseAttributeList(std::string_view list);

// Adaptive moment estimation with bias correction.
class Adam {
 public:
  Adam(const ParamStore& store, double learning_rate, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-8);

  // Applies one update from the accumulated gradients, then zeroes them.
  // Throws std::runtime_error (leaving parameters untouched) if any gradient
  // is not finite.
  void Step(ParamStore& store);
  std::size_t steps() const { return steps_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t steps_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  ModelConfig model_config;
  TrainingConfig training_config;
  NormStats norm_stats;
  ParamStore params;
  std::size_t epoch = 0;
  std::string rng_digest;
};

std::string SerializeCheckpoint(const Checkpoint& ckpt);
// Throws std::runtime_error on bad magic, unsupported version or truncation.
Checkpoint DeserializeCheckpoint(std::string_view bytes);
void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double beta = 0.0;
  double loss = 0.0;
  double bce = 0.0;
  double w2 = 0.0;
  double attr_mse = 0.0;
};

std::string EpochStatsToJsonLine(const EpochStats& s);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochStats> log;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Samples are processed in chunks of at most this many graphs; gradients
// of a minibatch are accumulated across its chunks before the update.
inline constexpr std::size_t kMaxChunk = 64;

// Throws std::invalid_argument on an empty training set or invalid configs
// and std::runtime_error naming the epoch if the loss stops being finite.
TrainResult Train(std::span<const GraphRecord> train, const NormStats& stats,
                  const ModelConfig& model_config,
                  const TrainingConfig& config,
                  const EpochCallback& on_epoch = {});

// Edge probabilities [B, N, N] from the latent means: the decoder applied
// to beta * mu_prior + (1 - beta) * mu_posterior.
Tensor ReconstructProbabilities(Model& model, std::span<const GraphRecord> records,
                                const NormStats& stats,
                                const std::vector<double>& attr_mask,
                                double beta);

enum class SampleMode { kSample, kThreshold };
std::string_view SampleModeName(SampleMode mode);
SampleMode ParseSampleMode(std::string_view name);

struct GenerateOptions {
  std::size_t num_samples = 1;
  SampleMode mode = SampleMode::kSample;
  std::vector<Attr> masked;
  std::uint64_t seed = 0;
};

// Reads a graph on `num_nodes` nodes from the top-left block of a row-major
// max_nodes x max_nodes probability matrix.
Graph ReadGraph(std::span<const double> probs, std::size_t max_nodes,
                std::size_t num_nodes, SampleMode mode, std::mt19937_64& rng);

// Attribute-conditioned sampling from the prior of a trained model.
class Generator {
 public:
  explicit Generator(const Checkpoint& ckpt);

  std::vector<Graph> Generate(const AttributeVector& target,
                              const GenerateOptions& options);

  Model& model() { return model_; }

 private:
  TrainingConfig training_config_;
  NormStats norm_stats_;
  Model model_;
};

}  // namespace ctrlgraph

#endif  // CTRLGRAPH_TRAINING_HPP_
