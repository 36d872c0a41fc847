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

// Conditional graph VAE: a convolutional posterior encoder over padded
// adjacency matrices, an attribute-conditioned prior, a convolutional
// adjacency decoder and an attribute decoder, tied together by the
// inclusion-factor mixture of posterior and prior latents.

#ifndef CTRLGRAPH_MODEL_HPP_
#define CTRLGRAPH_MODEL_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "ctrlgraph/autodiff.hpp"
#include "ctrlgraph/graph.hpp"

namespace ctrlgraph {

struct ModelConfig {
  std::size_t max_nodes = 50;
  std::size_t latent_dim = 128;
  std::array<std::size_t, 2> encoder_channels = {32, 64};
  std::array<std::size_t, 2> decoder_channels = {64, 32};
  std::size_t attr_hidden = 1024;

  // max_nodes even and >= 4, second encoder channel count even, all sizes
  // positive. Throws std::invalid_argument.
  void Validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class ScheduleMode {
  kScheduled,      // beta(t) rises towards gamma
  kConstant,       // beta == gamma
  kPosteriorOnly,  // beta == 0
};

std::string_view ScheduleModeName(ScheduleMode mode);
ScheduleMode ParseScheduleMode(std::string_view name);

struct SchedulerConfig {
  double beta0 = 0.0;
  double alpha = 0.1;
  double gamma = 0.1;
  ScheduleMode mode = ScheduleMode::kScheduled;

  void Validate() const;
};

// min(gamma, (1 - (1 - beta0)(1 - t))^(1 / alpha)). Throws
// std::invalid_argument for t outside [0, 1].
double InclusionFactor(double t, const SchedulerConfig& cfg);
// Beta for 1-based epoch e of `epochs`, honouring cfg.mode.
double EpochBeta(std::size_t epoch, std::size_t epochs,
                 const SchedulerConfig& cfg);

struct GaussianParams {
  std::vector<double> mu;
  std::vector<double> sigma;
};

// ||mu_q - mu_p||^2 + ||sigma_q - sigma_p||^2 for diagonal Gaussians.
double W2Gaussian(const GaussianParams& q, const GaussianParams& p);
std::vector<double> MixLatents(std::span<const double> z_c,
                               std::span<const double> z_g, double beta);

class Model {
 public:
  // Random initialization, uniform in +-1/sqrt(fan_in).
  Model(const ModelConfig& config, std::uint64_t seed);
  // Adopts existing parameters; throws std::invalid_argument if names or
  // shapes disagree with the configuration.
  Model(const ModelConfig& config, ParamStore params);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  struct Gaussian {
    Var mu;
    Var sigma;
  };

  // adjacency: [B, 1, N, N] symmetric with zero diagonal.
  Gaussian EncodeGraph(Tape& t, Var adjacency);
  // attributes: [B, 12] normalized. sigma is a constant of ones.
  Gaussian EncodeAttributes(Tape& t, Var attributes);
  // z: [B, d] -> edge probabilities [B, N, N].
  Var DecodeGraph(Tape& t, Var z);
  // z: [B, d] -> normalized attributes [B, 12].
  Var DecodeAttributes(Tape& t, Var z);

  // Layer-by-layer shapes, for the parameter schema.
  static std::vector<std::pair<std::string, Shape>> ParamSchema(
      const ModelConfig& config);

 private:
  ModelConfig config_;
  ParamStore params_;
};

struct LossWeights {
  double lambda_d = 1.0;
  double lambda_c = 1.0;
};

// Standard-normal draws for the two reparameterized samples.
struct LatentNoise {
  Tensor graph;       // [B, d]
  Tensor attributes;  // [B, d]

  static LatentNoise Draw(std::size_t batch, std::size_t dim,
                          std::mt19937_64& rng);
};

struct LossTerms {
  Var total;
  Var bce;
  Var w2;
  Var attr_mse;
};

// Builds the full objective for one batch:
//   bce(decode(beta z_c + (1 - beta) z_g), A) + lambda_d W2^2(q, p)
//   + lambda_c mse(D_att(z_c), c)
// adjacency: [B, 1, N, N]; attributes: [B, 12] normalized; attr_mask has 12
// entries in {0, 1} and zeroes the disabled prior inputs.
LossTerms TotalLoss(Tape& t, Model& model, const Tensor& adjacency,
                    const Tensor& attributes,
                    const std::vector<double>& attr_mask, double beta,
                    const LossWeights& weights, const LatentNoise& noise);

// Stacks padded adjacency matrices into [B, 1, N, N].
Tensor StackAdjacency(std::span<const Graph* const> graphs,
                      std::size_t max_nodes);

}  // namespace ctrlgraph

#endif  // CTRLGRAPH_MODEL_HPP_
