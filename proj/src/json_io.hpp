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

// JSON conversions shared by the dataset, checkpoint and report writers.

#ifndef CTRLGRAPH_SRC_JSON_IO_HPP_
#define CTRLGRAPH_SRC_JSON_IO_HPP_

#include "ctrlgraph/dataset.hpp"
#include "ctrlgraph/model.hpp"
#include "ctrlgraph/training.hpp"
#include "json.hpp"

namespace ctrlgraph::internal {

using Json = nlohmann::ordered_json;

Json AttributesToJson(const AttributeVector& c);
AttributeVector AttributesFromJson(const Json& j);

Json NormStatsToJson(const NormStats& s);
NormStats NormStatsFromJson(const Json& j);

Json DatasetConfigToJson(const DatasetConfig& c);
DatasetConfig DatasetConfigFromJson(const Json& j);

Json ModelConfigToJson(const ModelConfig& c);
ModelConfig ModelConfigFromJson(const Json& j);

Json TrainingConfigToJson(const TrainingConfig& c);
TrainingConfig TrainingConfigFromJson(const Json& j);

}  // namespace ctrlgraph::internal

#endif  // CTRLGRAPH_SRC_JSON_IO_HPP_
