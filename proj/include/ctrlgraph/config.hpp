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

#ifndef CTRLGRAPH_CONFIG_HPP_
#define CTRLGRAPH_CONFIG_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlgraph/dataset.hpp"
#include "ctrlgraph/model.hpp"
#include "ctrlgraph/training.hpp"

namespace ctrlgraph {

// Environment variable naming a config file used when --config is absent.
inline constexpr const char* kConfigEnvVar = "CTRLGRAPH_CONFIG";

// Run configuration file:
//
//   # comment
//   [dataset]
//   k = 2
//   [training]
//   epochs = 200
//
// Keys are grouped under [dataset], [model] and [training]. Unknown
// sections, unknown keys, duplicates and malformed values are errors.
struct RunConfig {
  DatasetConfig dataset;
  ModelConfig model;  // max_nodes mirrors dataset.max_nodes
  TrainingConfig training;

  void Validate() const;
};

struct ConfigKeyInfo {
  std::string section;
  std::string key;
  std::string default_value;
  std::string help;
};

// Every accepted key with its default, in file order.
const std::vector<ConfigKeyInfo>& ConfigKeys();

// Sets one key; throws std::invalid_argument on unknown keys or bad values.
void SetConfigValue(RunConfig& cfg, std::string_view section,
                    std::string_view key, std::string_view value);

// Throws std::invalid_argument with the offending line number.
RunConfig ParseRunConfig(std::string_view text);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Renders a complete config file that parses back to `cfg`.
std::string RunConfigToText(const RunConfig& cfg);

// `explicit_path` if given, else the file named by CTRLGRAPH_CONFIG, else
// nothing.
std::optional<std::filesystem::path> ResolveConfigPath(
    const std::optional<std::filesystem::path>& explicit_path);

}  // namespace ctrlgraph

#endif  // CTRLGRAPH_CONFIG_HPP_
