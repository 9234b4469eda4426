// Copyright 2026 The XEL Authors.
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

#ifndef XEL_MODEL_IO_H_
#define XEL_MODEL_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"
#include "xel/burn.h"
#include "xel/features.h"
#include "xel/linear_greedy.h"

namespace xel {

// A trained disambiguator as stored on disk:
//   {"format_version": 1, "model": "burn"|"linear", "feature_set": ...,
//    "h": ..., "leaky_slope": ..., "gating": [13 floats],
//    "weights": {name: {"shape": [...], "data": [...]}},
//    "train_config": {...}}
// Linear models omit h, leaky_slope and gating.
struct Model {
  FeatureSet feature_set = FeatureSet::kFeat;
  std::variant<LinearParams, BurnParams> params;
  nlohmann::json train_config = nlohmann::json::object();

  bool is_burn() const { return std::holds_alternative<BurnParams>(params); }
};

std::string SerializeModel(const Model &model);
Model ParseModel(std::string_view text);

void SaveModel(const Model &model, const std::filesystem::path &path);
Model LoadModel(const std::filesystem::path &path);

}  // namespace xel

#endif  // XEL_MODEL_IO_H_
