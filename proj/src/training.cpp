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

#include "ctrlgraph/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json_io.hpp"

namespace ctrlgraph {

using internal::Json;

namespace {

constexpr char kMagic[8] = {'C', 'G', 'V', 'A', 'E', 'C', 'K', 'P'};
constexpr std::size_t kHeaderSize = 8 + 4 + 4 + 8 + 8;

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t GetLE(std::string_view in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i]))
         << (8 * i);
  }
  return v;
}

std::string HexDigest(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::string RngDigest(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return HexDigest(os.str());
}

std::size_t RoundNodeCount(double v, std::size_t max_nodes) {
  if (!std::isfinite(v)) return 1;
  const double r = std::round(v);
  if (r < 1.0) return 1;
  if (r > static_cast<double>(max_nodes)) return max_nodes;
  return static_cast<std::size_t>(r);
}

}  // namespace

namespace internal {

Json ModelConfigToJson(const ModelConfig& c) {
  return Json{{"max_nodes", c.max_nodes},
              {"latent_dim", c.latent_dim},
              {"encoder_channels", c.encoder_channels},
              {"decoder_channels", c.decoder_channels},
              {"attr_hidden", c.attr_hidden}};
}

ModelConfig ModelConfigFromJson(const Json& j) {
  ModelConfig c;
  c.max_nodes = j.at("max_nodes").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.encoder_channels =
      j.at("encoder_channels").get<std::array<std::size_t, 2>>();
  c.decoder_channels =
      j.at("decoder_channels").get<std::array<std::size_t, 2>>();
  c.attr_hidden = j.at("attr_hidden").get<std::size_t>();
  return c;
}

Json TrainingConfigToJson(const TrainingConfig& c) {
  Json enabled = Json::array();
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    if (c.enabled_attributes[i]) enabled.push_back(kAttributeNames[i]);
  }
  return Json{{"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"lambda_d", c.weights.lambda_d},
              {"lambda_c", c.weights.lambda_c},
              {"scheduler",
               {{"beta0", c.scheduler.beta0},
                {"alpha", c.scheduler.alpha},
                {"gamma", c.scheduler.gamma},
                {"mode", ScheduleModeName(c.scheduler.mode)}}},
              {"seed", c.seed},
              {"enabled_attributes", enabled}};
}

TrainingConfig TrainingConfigFromJson(const Json& j) {
  TrainingConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.weights.lambda_d = j.at("lambda_d").get<double>();
  c.weights.lambda_c = j.at("lambda_c").get<double>();
  const Json& s = j.at("scheduler");
  c.scheduler.beta0 = s.at("beta0").get<double>();
  c.scheduler.alpha = s.at("alpha").get<double>();
  c.scheduler.gamma = s.at("gamma").get<double>();
  c.scheduler.mode = ParseScheduleMode(s.at("mode").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.enabled_attributes.fill(false);
  for (const auto& name : j.at("enabled_attributes")) {
    auto a = AttributeFromName(name.get<std::string>());
    if (!a) throw std::runtime_error("unknown attribute in checkpoint");
    c.enabled_attributes[static_cast<std::size_t>(*a)] = true;
  }
  return c;
}

}  // namespace internal

void TrainingConfig::Validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 1) {
    throw std::invalid_argument("batch_size must be at least 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (!(weights.lambda_d >= 0.0) || !(weights.lambda_c >= 0.0)) {
    throw std::invalid_argument("loss weights must be nonnegative");
  }
  scheduler.Validate();
  if (std::none_of(enabled_attributes.begin(), enabled_attributes.end(),
                   [](bool b) { return b; })) {
    throw std::invalid_argument("at least one attribute must stay enabled");
  }
}

std::vector<double> TrainingConfig::AttributeMask() const {
  std::vector<double> mask(kNumAttributes);
  for (std::size_t i = 0; i < kNumAttributes; ++i) {
    mask[i] = enabled_attributes[i] ? 1.0 : 0.0;
  }
  return mask;
}

std::vector<Attr> ParseAttributeList(std::string_view list) {
  std::vector<Attr> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view item = list.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      auto a = AttributeFromName(item);
      if (!a) {
        throw std::invalid_argument("unknown attribute: " + std::string(item));
      }
      if (std::find(out.begin(), out.end(), *a) == out.end()) out.push_back(*a);
    }
    start = end + 1;
  }
  return out;
}

Adam::Adam(const ParamStore& store, double learning_rate, double beta1,
           double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    m_.emplace_back(store.value(i).size(), 0.0);
    v_.emplace_back(store.value(i).size(), 0.0);
  }
}

void Adam::Step(ParamStore& store) {
  if (store.size() != m_.size()) {
    throw std::invalid_argument("optimizer bound to a different store");
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (double g : store.grad(i)) {
      if (!std::isfinite(g)) {
        throw std::runtime_error("non-finite gradient in " + store.name(i));
      }
    }
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& w = store.value(i).data;
    auto& g = store.grad(i);
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      w[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
    std::fill(g.begin(), g.end(), 0.0);
  }
}

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  Json params = Json::array();
  std::uint64_t scalars = 0;
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    params.push_back(Json{{"name", ckpt.params.name(i)},
                          {"shape", ckpt.params.value(i).shape}});
    scalars += ckpt.params.value(i).size();
  }
  Json meta{{"model", internal::ModelConfigToJson(ckpt.model_config)},
            {"training", internal::TrainingConfigToJson(ckpt.training_config)},
            {"norm_stats", internal::NormStatsToJson(ckpt.norm_stats)},
            {"epoch", ckpt.epoch},
            {"rng_digest", ckpt.rng_digest},
            {"params", params}};
  const std::string text = meta.dump();

  std::string out(kMagic, sizeof(kMagic));
  PutU32(out, Checkpoint::kVersion);
  PutU32(out, static_cast<std::uint32_t>(ckpt.params.size()));
  PutU64(out, scalars);
  PutU64(out, text.size());
  out += text;
  out.reserve(out.size() + 8 * scalars);
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    for (double v : ckpt.params.value(i).data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      PutU64(out, bits);
    }
  }
  return out;
}

Checkpoint DeserializeCheckpoint(std::string_view bytes) {
  if (bytes.size() < kHeaderSize) {
    throw std::runtime_error("checkpoint truncated: header incomplete");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file (bad magic)");
  }
  const auto version = static_cast<std::uint32_t>(GetLE(bytes, 8, 4));
  if (version != Checkpoint::kVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  const std::uint64_t count = GetLE(bytes, 12, 4);
  const std::uint64_t scalars = GetLE(bytes, 16, 8);
  const std::uint64_t meta_len = GetLE(bytes, 24, 8);
  if (meta_len > bytes.size() - kHeaderSize ||
      scalars > (bytes.size() - kHeaderSize - meta_len) / 8) {
    throw std::runtime_error("checkpoint truncated");
  }
  if (kHeaderSize + meta_len + 8 * scalars != bytes.size()) {
    throw std::runtime_error("checkpoint has trailing bytes");
  }

  Checkpoint ckpt;
  Json meta;
  try {
    meta = Json::parse(bytes.substr(kHeaderSize, meta_len));
    ckpt.model_config = internal::ModelConfigFromJson(meta.at("model"));
    ckpt.training_config =
        internal::TrainingConfigFromJson(meta.at("training"));
    ckpt.norm_stats = internal::NormStatsFromJson(meta.at("norm_stats"));
    ckpt.epoch = meta.at("epoch").get<std::size_t>();
    ckpt.rng_digest = meta.at("rng_digest").get<std::string>();
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("bad checkpoint metadata: ") +
                             e.what());
  }
  const Json& params = meta.at("params");
  if (params.size() != count) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  std::size_t offset = kHeaderSize + meta_len;
  std::uint64_t seen = 0;
  for (const auto& p : params) {
    Shape shape = p.at("shape").get<Shape>();
    const std::size_t n = ShapeSize(shape);
    seen += n;
    if (seen > scalars) {
      throw std::runtime_error("checkpoint parameter sizes exceed payload");
    }
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < n; ++i, offset += 8) {
      const std::uint64_t bits = GetLE(bytes, offset, 8);
      std::memcpy(&t.data[i], &bits, sizeof(bits));
    }
    ckpt.params.Add(p.at("name").get<std::string>(), std::move(t));
  }
  if (seen != scalars) {
    throw std::runtime_error("checkpoint parameter sizes disagree with header");
  }
  // Validates names and shapes against the configuration.
  Model(ckpt.model_config, ckpt.params);
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::string bytes = SerializeCheckpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return DeserializeCheckpoint(bytes);
}

std::string EpochStatsToJsonLine(const EpochStats& s) {
  return Json{{"epoch", s.epoch},   {"beta", s.beta}, {"loss", s.loss},
              {"bce", s.bce},       {"w2", s.w2},     {"attr_mse", s.attr_mse}}
      .dump();
}

TrainResult Train(std::span<const GraphRecord> train, const NormStats& stats,
                  const ModelConfig& model_config,
                  const TrainingConfig& config, const EpochCallback& on_epoch) {
  if (train.empty()) throw std::invalid_argument("training set is empty");
  model_config.Validate();
  config.Validate();
  const std::size_t n_max = model_config.max_nodes;
  for (const auto& r : train) {
    if (r.graph.num_nodes() > n_max) {
      throw std::invalid_argument("record " + r.id + " has more than " +
                                  std::to_string(n_max) + " nodes");
    }
  }

  Model model(model_config, config.seed);
  Adam adam(model.params(), config.learning_rate);
  std::mt19937_64 rng(config.seed ^ 0x2545f4914f6cdd1dULL);
  const std::vector<double> mask = config.AttributeMask();
  const std::size_t nn = n_max * n_max;

  std::vector<std::vector<double>> adjacency;
  std::vector<NormalizedAttributes> attributes;
  for (const auto& r : train) {
    adjacency.push_back(PadAdjacency(r.graph, n_max));
    attributes.push_back(Normalize(r.attributes, stats));
  }
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochStats st;
    st.epoch = epoch;
    st.beta = EpochBeta(epoch, config.epochs, config.scheduler);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t batch = std::min(config.batch_size, order.size() - start);
      for (std::size_t c0 = start; c0 < start + batch; c0 += kMaxChunk) {
        const std::size_t chunk = std::min(kMaxChunk, start + batch - c0);
        Tensor a({chunk, 1, n_max, n_max});
        Tensor c({chunk, kNumAttributes});
        for (std::size_t i = 0; i < chunk; ++i) {
          const std::size_t r = order[c0 + i];
          std::copy(adjacency[r].begin(), adjacency[r].end(),
                    a.data.begin() + i * nn);
          std::copy(attributes[r].begin(), attributes[r].end(),
                    c.data.begin() + i * kNumAttributes);
        }
        LatentNoise noise =
            LatentNoise::Draw(chunk, model_config.latent_dim, rng);
        Tape tape;
        LossTerms terms = TotalLoss(tape, model, a, c, mask, st.beta,
                                    config.weights, noise);
        const double loss = tape.value(terms.total)[0];
        if (!std::isfinite(loss)) {
          throw std::runtime_error("training diverged at epoch " +
                                   std::to_string(epoch) + ": loss is " +
                                   std::to_string(loss));
        }
        tape.Backward(terms.total, {static_cast<double>(chunk) / batch});
        const double w = static_cast<double>(chunk);
        st.loss += w * loss;
        st.bce += w * tape.value(terms.bce)[0];
        st.w2 += w * tape.value(terms.w2)[0];
        st.attr_mse += w * tape.value(terms.attr_mse)[0];
      }
      try {
        adam.Step(model.params());
      } catch (const std::runtime_error& e) {
        throw std::runtime_error("training diverged at epoch " +
                                 std::to_string(epoch) + ": " + e.what());
      }
    }
    const double n = static_cast<double>(order.size());
    st.loss /= n;
    st.bce /= n;
    st.w2 /= n;
    st.attr_mse /= n;
    result.log.push_back(st);
    if (on_epoch) on_epoch(st);
  }

  Checkpoint& ckpt = result.checkpoint;
  ckpt.model_config = model_config;
  ckpt.training_config = config;
  ckpt.norm_stats = stats;
  ckpt.params = std::move(model.params());
  ckpt.epoch = config.epochs;
  ckpt.rng_digest = RngDigest(rng);
  return result;
}

Tensor ReconstructProbabilities(Model& model,
                                std::span<const GraphRecord> records,
                                const NormStats& stats,
                                const std::vector<double>& attr_mask,
                                double beta) {
  const std::size_t n_max = model.config().max_nodes, nn = n_max * n_max;
  Tensor out({records.size(), n_max, n_max});
  for (std::size_t c0 = 0; c0 < records.size(); c0 += kMaxChunk) {
    const std::size_t chunk = std::min(kMaxChunk, records.size() - c0);
    std::vector<const Graph*> graphs;
    Tensor c({chunk, kNumAttributes});
    for (std::size_t i = 0; i < chunk; ++i) {
      graphs.push_back(&records[c0 + i].graph);
      auto z = Normalize(records[c0 + i].attributes, stats);
      std::copy(z.begin(), z.end(), c.data.begin() + i * kNumAttributes);
    }
    Tape t;
    auto q = model.EncodeGraph(t, t.Constant(StackAdjacency(graphs, n_max)));
    auto p = model.EncodeAttributes(
        t, ops::MaskFeatures(t, t.Constant(std::move(c)), attr_mask));
    Var probs = model.DecodeGraph(t, ops::Mix(t, p.mu, q.mu, beta));
    std::copy(t.value(probs).data.begin(), t.value(probs).data.end(),
              out.data.begin() + c0 * nn);
  }
  return out;
}

std::string_view SampleModeName(SampleMode mode) {
  return mode == SampleMode::kSample ? "sample" : "threshold";
}

SampleMode ParseSampleMode(std::string_view name) {
  if (name == "sample") return SampleMode::kSample;
  if (name == "threshold") return SampleMode::kThreshold;
  throw std::invalid_argument("unknown sampling mode: " + std::string(name));
}

Graph ReadGraph(std::span<const double> probs, std::size_t max_nodes,
                std::size_t num_nodes, SampleMode mode, std::mt19937_64& rng) {
  if (num_nodes > max_nodes || probs.size() != max_nodes * max_nodes) {
    throw std::invalid_argument("probability block does not fit");
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Graph g(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t j = i + 1; j < num_nodes; ++j) {
      const double p = probs[i * max_nodes + j];
      const bool edge = mode == SampleMode::kThreshold ? p > 0.5 : u(rng) < p;
      if (edge) g.AddEdge(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  return g;
}

Generator::Generator(const Checkpoint& ckpt)
    : training_config_(ckpt.training_config),
      norm_stats_(ckpt.norm_stats),
      model_(ckpt.model_config, ckpt.params) {}

std::vector<Graph> Generator::Generate(const AttributeVector& target,
                                       const GenerateOptions& options) {
  for (double v : target.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("target attributes must be finite");
    }
  }
  const std::size_t n = options.num_samples;
  if (n == 0) return {};
  const std::size_t d = model_.config().latent_dim;
  const std::size_t n_max = model_.config().max_nodes, nn = n_max * n_max;

  AttributeVector masked = target;
  for (Attr a : options.masked) masked[a] = 0.0;
  const NormalizedAttributes z = Normalize(masked, norm_stats_);
  Tensor c({n, kNumAttributes});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(z.begin(), z.end(), c.data.begin() + i * kNumAttributes);
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Tensor eps({n, d});
  for (auto& e : eps.data) e = nd(rng);

  Tape t;
  auto prior = model_.EncodeAttributes(
      t, ops::MaskFeatures(t, t.Constant(std::move(c)),
                           training_config_.AttributeMask()));
  Var z_c = ops::Reparameterize(t, prior.mu, prior.sigma, eps);
  Var probs = model_.DecodeGraph(t, z_c);

  const bool nodes_masked =
      std::find(options.masked.begin(), options.masked.end(), Attr::kNodes) !=
      options.masked.end();
  const bool nodes_given =
      training_config_.enabled(Attr::kNodes) && !nodes_masked;
  std::vector<std::size_t> sizes(n, RoundNodeCount(target[Attr::kNodes], n_max));
  if (!nodes_given) {
    Var decoded = model_.DecodeAttributes(t, z_c);
    for (std::size_t i = 0; i < n; ++i) {
      NormalizedAttributes row;
      std::copy_n(t.value(decoded).data.begin() + i * kNumAttributes,
                  kNumAttributes, row.begin());
      sizes[i] = RoundNodeCount(Denormalize(row, norm_stats_)[Attr::kNodes],
                                n_max);
    }
  }

  std::vector<Graph> out;
  out.reserve(n);
  const auto& pv = t.value(probs).data;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(ReadGraph(std::span<const double>(pv).subspan(i * nn, nn),
                            n_max, sizes[i], options.mode, rng));
  }
  return out;
}

}  // namespace ctrlgraph
