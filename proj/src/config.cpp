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

#include "ctrlgraph/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ctrlgraph {

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> SplitCommas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(',', start);
    out.push_back(Trim(s.substr(start, end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

template <typename T>
T ParseNumber(std::string_view s) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a valid number: '" + std::string(s) + "'");
  }
  return value;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <std::size_t K, typename T>
std::array<T, K> ParseTuple(std::string_view s) {
  const auto parts = SplitCommas(s);
  if (parts.size() != K) {
    throw std::invalid_argument("expected " + std::to_string(K) +
                                " comma-separated values, got '" +
                                std::string(s) + "'");
  }
  std::array<T, K> out{};
  for (std::size_t i = 0; i < K; ++i) out[i] = ParseNumber<T>(parts[i]);
  return out;
}

template <typename Array, typename Fmt>
std::string JoinTuple(const Array& a, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) out += ',';
    out += fmt(a[i]);
  }
  return out;
}

std::string SizeString(std::size_t v) { return std::to_string(v); }

struct KeyHandler {
  const char* section;
  const char* key;
  const char* help;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyHandler>& Handlers() {
  static const std::vector<KeyHandler> handlers = {
      {"dataset", "k", "hop radius of extracted subgraphs",
       [](RunConfig& c, std::string_view v) {
         c.dataset.k = ParseNumber<std::size_t>(v);
       },
       [](const RunConfig& c) { return SizeString(c.dataset.k); }},
      {"dataset", "max_nodes", "largest subgraph kept; also the model size",
       [](RunConfig& c, std::string_view v) {
         c.dataset.max_nodes = c.model.max_nodes = ParseNumber<std::size_t>(v);
       },
       [](const RunConfig& c) { return SizeString(c.dataset.max_nodes); }},
      {"dataset", "splits", "train,val,test fractions",
       [](RunConfig& c, std::string_view v) {
         c.dataset.split_fractions = ParseTuple<3, double>(v);
       },
       [](const RunConfig& c) {
         return JoinTuple(c.dataset.split_fractions, FormatDouble);
       }},
      {"dataset", "seed", "split shuffle seed",
       [](RunConfig& c, std::string_view v) {
         c.dataset.seed = ParseNumber<std::uint64_t>(v);
       },
       [](const RunConfig& c) { return std::to_string(c.dataset.seed); }},
      {"dataset", "order", "node order: as-is or bfs",
       [](RunConfig& c, std::string_view v) {
         c.dataset.node_order = ParseNodeOrder(v);
       },
       [](const RunConfig& c) {
         return std::string(NodeOrderName(c.dataset.node_order));
       }},
      {"model", "latent_dim", "latent dimension",
       [](RunConfig& c, std::string_view v) {
         c.model.latent_dim = ParseNumber<std::size_t>(v);
       },
       [](const RunConfig& c) { return SizeString(c.model.latent_dim); }},
      {"model", "encoder_channels", "graph encoder conv channels",
       [](RunConfig& c, std::string_view v) {
         c.model.encoder_channels = ParseTuple<2, std::size_t>(v);
       },
       [](const RunConfig& c) {
         return JoinTuple(c.model.encoder_channels, SizeString);
       }},
      {"model", "decoder_channels", "graph decoder conv channels",
       [](RunConfig& c, std::string_view v) {
         c.model.decoder_channels = ParseTuple<2, std::size_t>(v);
       },
       [](const RunConfig& c) {
         return JoinTuple(c.model.decoder_channels, SizeString);
       }},
      {"model", "attr_hidden", "hidden width of the attribute networks",
       [](RunConfig& c, std::string_view v) {
         c.model.attr_hidden = ParseNumber<std::size_t>(v);
       },
       [](const RunConfig& c) { return SizeString(c.model.attr_hidden); }},
      {"training", "epochs", "number of epochs",
       [](RunConfig& c, std::string_view v) {
         c.training.epochs = ParseNumber<std::size_t>(v);
       },
       [](const RunConfig& c) { return SizeString(c.training.epochs); }},
      {"training", "batch_size", "minibatch size",
       [](RunConfig& c, std::string_view v) {
         c.training.batch_size = ParseNumber<std::size_t>(v);
       },
       [](const RunConfig& c) { return SizeString(c.training.batch_size); }},
      {"training", "learning_rate", "Adam step size",
       [](RunConfig& c, std::string_view v) {
         c.training.learning_rate = ParseNumber<double>(v);
       },
       [](const RunConfig& c) { return FormatDouble(c.training.learning_rate); }},
      {"training", "lambda_d", "weight of the latent distance term",
       [](RunConfig& c, std::string_view v) {
         c.training.weights.lambda_d = ParseNumber<double>(v);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.training.weights.lambda_d);
       }},
      {"training", "lambda_c", "weight of the attribute reconstruction term",
       [](RunConfig& c, std::string_view v) {
         c.training.weights.lambda_c = ParseNumber<double>(v);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.training.weights.lambda_c);
       }},
      {"training", "beta0", "inclusion factor at t = 0",
       [](RunConfig& c, std::string_view v) {
         c.training.scheduler.beta0 = ParseNumber<double>(v);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.training.scheduler.beta0);
       }},
      {"training", "alpha", "curve shape exponent",
       [](RunConfig& c, std::string_view v) {
         c.training.scheduler.alpha = ParseNumber<double>(v);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.training.scheduler.alpha);
       }},
      {"training", "gamma", "inclusion factor cap",
       [](RunConfig& c, std::string_view v) {
         c.training.scheduler.gamma = ParseNumber<double>(v);
       },
       [](const RunConfig& c) {
         return FormatDouble(c.training.scheduler.gamma);
       }},
      {"training", "schedule", "scheduled, constant or posterior-only",
       [](RunConfig& c, std::string_view v) {
         c.training.scheduler.mode = ParseScheduleMode(v);
       },
       [](const RunConfig& c) {
         return std::string(ScheduleModeName(c.training.scheduler.mode));
       }},
      {"training", "seed", "initialization, shuffle and noise seed",
       [](RunConfig& c, std::string_view v) {
         c.training.seed = ParseNumber<std::uint64_t>(v);
       },
       [](const RunConfig& c) { return std::to_string(c.training.seed); }},
      {"training", "disable_attrs", "comma-separated attributes to drop",
       [](RunConfig& c, std::string_view v) {
         c.training.enabled_attributes.fill(true);
         if (Trim(v).empty()) return;
         for (Attr a : ParseAttributeList(v)) {
           c.training.enabled_attributes[static_cast<std::size_t>(a)] = false;
         }
       },
       [](const RunConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < kNumAttributes; ++i) {
           if (c.training.enabled_attributes[i]) continue;
           if (!out.empty()) out += ',';
           out += kAttributeNames[i];
         }
         return out;
       }},
  };
  return handlers;
}

}  // namespace

void RunConfig::Validate() const {
  dataset.Validate();
  if (model.max_nodes != dataset.max_nodes) {
    throw std::invalid_argument("model and dataset max_nodes differ");
  }
  model.Validate();
  training.Validate();
}

const std::vector<ConfigKeyInfo>& ConfigKeys() {
  static const std::vector<ConfigKeyInfo> keys = [] {
    std::vector<ConfigKeyInfo> out;
    const RunConfig defaults;
    for (const auto& h : Handlers()) {
      out.push_back({h.section, h.key, h.get(defaults), h.help});
    }
    return out;
  }();
  return keys;
}

void SetConfigValue(RunConfig& cfg, std::string_view section,
                    std::string_view key, std::string_view value) {
  for (const auto& h : Handlers()) {
    if (section == h.section && key == h.key) {
      try {
        h.set(cfg, Trim(value));
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(section) + "." +
                                    std::string(key) + ": " + e.what());
      }
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) +
                              "' in [" + std::string(section) + "]");
}

RunConfig ParseRunConfig(std::string_view text) {
  RunConfig cfg;
  cfg.model.max_nodes = cfg.dataset.max_nodes;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = Trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    auto fail = [&](const std::string& what) {
      return std::invalid_argument("config line " + std::to_string(line_no) +
                                   ": " + what);
    };
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw fail("unterminated section header");
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      if (section != "dataset" && section != "model" && section != "training") {
        throw fail("unknown section [" + section + "]");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw fail("expected key = value");
    if (section.empty()) throw fail("key outside of a section");
    const std::string key(Trim(line.substr(0, eq)));
    if (!seen.insert(section + "." + key).second) {
      throw fail("duplicate key '" + key + "'");
    }
    try {
      SetConfigValue(cfg, section, key, line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
  }
  cfg.Validate();
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return ParseRunConfig(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string RunConfigToText(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& h : Handlers()) {
    if (section != h.section) {
      if (!section.empty()) out += '\n';
      section = h.section;
      out += "[" + section + "]\n";
    }
    out += std::string("# ") + h.help + "\n";
    out += std::string(h.key) + " = " + h.get(cfg) + "\n";
  }
  return out;
}

std::optional<std::filesystem::path> ResolveConfigPath(
    const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return explicit_path;
  const char* env = std::getenv(kConfigEnvVar);
  if (env != nullptr && *env != '\0') return std::filesystem::path(env);
  return std::nullopt;
}

}  // namespace ctrlgraph
