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

#include "ctrlgraph/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ctrlgraph/dataset.hpp"

namespace ctrlgraph {

namespace {

std::size_t EncoderSide(const ModelConfig& c) { return c.max_nodes / 2 / 2; }
std::size_t DecoderSide(const ModelConfig& c) { return c.max_nodes / 2; }

void CheckAdjacencyBatch(const Tensor& a) {
  const std::size_t n = a.shape[2];
  for (std::size_t s = 0; s < a.shape[0]; ++s) {
    const double* m = a.data.data() + s * n * n;
    for (std::size_t i = 0; i < n; ++i) {
      if (m[i * n + i] != 0.0) {
        throw std::invalid_argument("adjacency has a nonzero diagonal");
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        if (m[i * n + j] != m[j * n + i]) {
          throw std::invalid_argument("adjacency is not symmetric");
        }
      }
    }
  }
}

}  // namespace

void ModelConfig::Validate() const {
  if (max_nodes < 4 || max_nodes % 2 != 0) {
    throw std::invalid_argument("max_nodes must be even and at least 4");
  }
  if (latent_dim == 0 || attr_hidden == 0 || encoder_channels[0] == 0 ||
      encoder_channels[1] == 0 || decoder_channels[0] == 0 ||
      decoder_channels[1] == 0) {
    throw std::invalid_argument("model sizes must be positive");
  }
  if (encoder_channels[1] % 2 != 0) {
    throw std::invalid_argument(
        "second encoder channel count must be even (mean/sigma split)");
  }
}

std::string_view ScheduleModeName(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::kScheduled:
      return "scheduled";
    case ScheduleMode::kConstant:
      return "constant";
    case ScheduleMode::kPosteriorOnly:
      return "posterior-only";
  }
  return "scheduled";
}

ScheduleMode ParseScheduleMode(std::string_view name) {
  for (auto m : {ScheduleMode::kScheduled, ScheduleMode::kConstant,
                 ScheduleMode::kPosteriorOnly}) {
    if (name == ScheduleModeName(m)) return m;
  }
  throw std::invalid_argument("unknown schedule mode: " + std::string(name));
}

void SchedulerConfig::Validate() const {
  if (!(beta0 >= 0.0 && beta0 < 1.0)) {
    throw std::invalid_argument("beta0 must be in [0, 1)");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must be in [0, 1]");
  }
}

double InclusionFactor(double t, const SchedulerConfig& cfg) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("inclusion factor needs t in [0, 1]");
  }
  const double linear = 1.0 - (1.0 - cfg.beta0) * (1.0 - t);
  return std::min(cfg.gamma, std::pow(linear, 1.0 / cfg.alpha));
}

double EpochBeta(std::size_t epoch, std::size_t epochs,
                 const SchedulerConfig& cfg) {
  if (epochs == 0 || epoch > epochs) {
    throw std::invalid_argument("epoch outside the training budget");
  }
  switch (cfg.mode) {
    case ScheduleMode::kConstant:
      return cfg.gamma;
    case ScheduleMode::kPosteriorOnly:
      return 0.0;
    case ScheduleMode::kScheduled:
      break;
  }
  return InclusionFactor(static_cast<double>(epoch) / epochs, cfg);
}

double W2Gaussian(const GaussianParams& q, const GaussianParams& p) {
  if (q.mu.size() != p.mu.size() || q.sigma.size() != p.sigma.size() ||
      q.mu.size() != q.sigma.size()) {
    throw std::invalid_argument("w2: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < q.mu.size(); ++i) {
    const double dm = q.mu[i] - p.mu[i];
    const double ds = q.sigma[i] - p.sigma[i];
    acc += dm * dm + ds * ds;
  }
  return acc;
}

std::vector<double> MixLatents(std::span<const double> z_c,
                               std::span<const double> z_g, double beta) {
  if (z_c.size() != z_g.size()) {
    throw std::invalid_argument("mix: dimension mismatch");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("mix: beta outside [0, 1]");
  }
  std::vector<double> z(z_c.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = beta * z_c[i] + (1.0 - beta) * z_g[i];
  }
  return z;
}

std::vector<std::pair<std::string, Shape>> Model::ParamSchema(
    const ModelConfig& c) {
  c.Validate();
  const std::size_t k = ops::kConvKernel;
  const std::size_t e1 = c.encoder_channels[0], e2 = c.encoder_channels[1];
  const std::size_t half = e2 / 2, es = EncoderSide(c);
  const std::size_t d1 = c.decoder_channels[0], d2 = c.decoder_channels[1];
  const std::size_t ds = DecoderSide(c), d = c.latent_dim;
  const std::size_t h = c.attr_hidden, a = kNumAttributes;
  return {
      {"encoder.conv1.weight", {e1, 1, k, k}},
      {"encoder.conv1.bias", {e1}},
      {"encoder.conv2.weight", {e2, e1, k, k}},
      {"encoder.conv2.bias", {e2}},
      {"encoder.mu.weight", {d, half * es * es}},
      {"encoder.mu.bias", {d}},
      {"encoder.sigma.weight", {d, half * es * es}},
      {"encoder.sigma.bias", {d}},
      {"prior.fc1.weight", {h, a}},
      {"prior.fc1.bias", {h}},
      {"prior.fc2.weight", {d, h}},
      {"prior.fc2.bias", {d}},
      {"decoder.fc.weight", {d1 * ds * ds, d}},
      {"decoder.fc.bias", {d1 * ds * ds}},
      {"decoder.conv1.weight", {d2, d1, k, k}},
      {"decoder.conv1.bias", {d2}},
      {"decoder.conv2.weight", {1, d2, k, k}},
      {"decoder.conv2.bias", {1}},
      {"attr_decoder.fc1.weight", {h, d}},
      {"attr_decoder.fc1.bias", {h}},
      {"attr_decoder.fc2.weight", {a, h}},
      {"attr_decoder.fc2.bias", {a}},
  };
}

Model::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  std::mt19937_64 rng(seed);
  std::size_t fan_in = 1;
  for (auto& [name, shape] : ParamSchema(config_)) {
    // A bias shares the bound of the weight declared just before it.
    if (shape.size() > 1) fan_in = ShapeSize(shape) / shape[0];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Tensor t(shape);
    for (auto& v : t.data) v = u(rng);
    params_.Add(name, std::move(t));
  }
}

Model::Model(const ModelConfig& config, ParamStore params)
    : config_(config), params_(std::move(params)) {
  auto schema = ParamSchema(config_);
  if (schema.size() != params_.size()) {
    throw std::invalid_argument("parameter count does not match the model");
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (params_.name(i) != schema[i].first ||
        params_.value(i).shape != schema[i].second) {
      throw std::invalid_argument("parameter " + params_.name(i) +
                                  " does not match the model schema");
    }
  }
}

Model::Gaussian Model::EncodeGraph(Tape& t, Var adjacency) {
  const Shape& s = t.shape(adjacency);
  const std::size_t n = config_.max_nodes;
  if (s.size() != 4 || s[1] != 1 || s[2] != n || s[3] != n) {
    throw std::invalid_argument("encoder expects [B, 1, " + std::to_string(n) +
                                ", " + std::to_string(n) + "], got " +
                                ShapeToString(s));
  }
  CheckAdjacencyBatch(t.value(adjacency));
  const std::size_t batch = s[0];
  auto p = [&](const char* name) { return t.Param(params_, name); };
  Var h = ops::Conv2d(t, adjacency, p("encoder.conv1.weight"),
                      p("encoder.conv1.bias"));
  h = ops::AvgPool2x(t, ops::Relu(t, h));
  h = ops::Conv2d(t, h, p("encoder.conv2.weight"), p("encoder.conv2.bias"));
  h = ops::AvgPool2x(t, ops::Relu(t, h));
  const std::size_t half = config_.encoder_channels[1] / 2;
  const std::size_t flat = ShapeSize(t.shape(h)) / batch / 2;
  Var mu_in = ops::Reshape(t, ops::SliceAxis1(t, h, 0, half), {batch, flat});
  Var sigma_in =
      ops::Reshape(t, ops::SliceAxis1(t, h, half, 2 * half), {batch, flat});
  Var mu = ops::Dense(t, mu_in, p("encoder.mu.weight"), p("encoder.mu.bias"));
  Var sigma = ops::Softplus(t, ops::Dense(t, sigma_in, p("encoder.sigma.weight"),
                                          p("encoder.sigma.bias")));
  return {mu, sigma};
}

Model::Gaussian Model::EncodeAttributes(Tape& t, Var attributes) {
  const Shape& s = t.shape(attributes);
  if (s.size() != 2 || s[1] != kNumAttributes) {
    throw std::invalid_argument("attribute encoder expects [B, 12], got " +
                                ShapeToString(s));
  }
  const std::size_t batch = s[0];
  Var h = ops::Relu(t, ops::Dense(t, attributes, t.Param(params_, "prior.fc1.weight"),
                                  t.Param(params_, "prior.fc1.bias")));
  Var mu = ops::Dense(t, h, t.Param(params_, "prior.fc2.weight"),
                      t.Param(params_, "prior.fc2.bias"));
  Var sigma = t.Constant(Tensor({batch, config_.latent_dim},
                                std::vector<double>(batch * config_.latent_dim, 1.0)));
  return {mu, sigma};
}

Var Model::DecodeGraph(Tape& t, Var z) {
  const Shape& s = t.shape(z);
  if (s.size() != 2 || s[1] != config_.latent_dim) {
    throw std::invalid_argument("graph decoder expects [B, d], got " +
                                ShapeToString(s));
  }
  const std::size_t batch = s[0], side = DecoderSide(config_);
  auto p = [&](const char* name) { return t.Param(params_, name); };
  Var h = ops::Dense(t, z, p("decoder.fc.weight"), p("decoder.fc.bias"));
  h = ops::Reshape(t, h, {batch, config_.decoder_channels[0], side, side});
  h = ops::Relu(t, ops::Conv2d(t, h, p("decoder.conv1.weight"),
                               p("decoder.conv1.bias")));
  h = ops::Upsample2x(t, h);
  h = ops::Conv2d(t, h, p("decoder.conv2.weight"), p("decoder.conv2.bias"));
  return ops::SymmetrizeZeroDiagonal(t, ops::Sigmoid(t, h));
}

Var Model::DecodeAttributes(Tape& t, Var z) {
  const Shape& s = t.shape(z);
  if (s.size() != 2 || s[1] != config_.latent_dim) {
    throw std::invalid_argument("attribute decoder expects [B, d], got " +
                                ShapeToString(s));
  }
  Var h = ops::Relu(t, ops::Dense(t, z, t.Param(params_, "attr_decoder.fc1.weight"),
                                  t.Param(params_, "attr_decoder.fc1.bias")));
  return ops::Dense(t, h, t.Param(params_, "attr_decoder.fc2.weight"),
                    t.Param(params_, "attr_decoder.fc2.bias"));
}

LatentNoise LatentNoise::Draw(std::size_t batch, std::size_t dim,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  LatentNoise n{Tensor({batch, dim}), Tensor({batch, dim})};
  for (auto& v : n.graph.data) v = nd(rng);
  for (auto& v : n.attributes.data) v = nd(rng);
  return n;
}

LossTerms TotalLoss(Tape& t, Model& model, const Tensor& adjacency,
                    const Tensor& attributes,
                    const std::vector<double>& attr_mask, double beta,
                    const LossWeights& weights, const LatentNoise& noise) {
  if (attr_mask.size() != kNumAttributes) {
    throw std::invalid_argument("attribute mask needs 12 entries");
  }
  const std::size_t batch = adjacency.shape.empty() ? 0 : adjacency.shape[0];
  if (batch == 0 || attributes.shape.size() != 2 ||
      attributes.shape[0] != batch) {
    throw std::invalid_argument("loss batch shapes disagree");
  }
  Var a = t.Constant(adjacency);
  Var c = ops::MaskFeatures(t, t.Constant(attributes), attr_mask);
  Model::Gaussian q = model.EncodeGraph(t, a);
  Model::Gaussian p = model.EncodeAttributes(t, c);
  Var z_g = ops::Reparameterize(t, q.mu, q.sigma, noise.graph);
  Var z_c = ops::Reparameterize(t, p.mu, p.sigma, noise.attributes);
  Var probs = model.DecodeGraph(t, ops::Mix(t, z_c, z_g, beta));

  const std::size_t n = model.config().max_nodes;
  Tensor target = adjacency;
  target.shape = {batch, n, n};
  LossTerms terms;
  terms.bce = ops::BceUpper(t, probs, target);
  terms.w2 = ops::W2Squared(t, q.mu, q.sigma, p.mu, p.sigma);
  terms.attr_mse = ops::Mse(t, model.DecodeAttributes(t, z_c), attributes);
  terms.total = ops::Add(
      t, terms.bce,
      ops::Add(t, ops::Scale(t, terms.w2, weights.lambda_d),
               ops::Scale(t, terms.attr_mse, weights.lambda_c)));
  return terms;
}

Tensor StackAdjacency(std::span<const Graph* const> graphs,
                      std::size_t max_nodes) {
  const std::size_t nn = max_nodes * max_nodes;
  Tensor out({graphs.size(), 1, max_nodes, max_nodes});
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    auto m = PadAdjacency(*graphs[i], max_nodes);
    std::copy(m.begin(), m.end(), out.data.begin() + i * nn);
  }
  return out;
}

}  // namespace ctrlgraph
