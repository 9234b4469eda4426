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

#include "xel/model_io.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "xel/error.h"

namespace xel {

using json = nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

json Tensor(std::vector<size_t> shape, std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error("refusing to save non-finite weights");
  }
  return {{"shape", shape},
          {"data", std::vector<double>(values.begin(), values.end())}};
}

std::vector<double> ReadTensor(const json &weights, const std::string &name,
                               const std::vector<size_t> &shape) {
  const json &entry = weights.at(name);
  if (entry.at("shape").get<std::vector<size_t>>() != shape) {
    throw Error("tensor " + name + " has an unexpected shape");
  }
  std::vector<double> data = entry.at("data").get<std::vector<double>>();
  size_t expected = 1;
  for (size_t s : shape) expected *= s;
  if (data.size() != expected) {
    throw Error("tensor " + name + " has " + std::to_string(data.size()) +
                " values, expected " + std::to_string(expected));
  }
  return data;
}

}  // namespace

std::string SerializeModel(const Model &model) {
  json j = {{"format_version", kModelFormatVersion},
            {"feature_set", std::string(FeatureSetName(model.feature_set))},
            {"train_config", model.train_config}};
  json weights = json::object();
  if (const auto *burn = std::get_if<BurnParams>(&model.params)) {
    burn->CheckShapes();
    j["model"] = "burn";
    j["h"] = burn->hidden;
    j["leaky_slope"] = burn->leaky_slope;
    j["gating"] = std::vector<double>(burn->gating.values.begin(),
                                      burn->gating.values.end());
    burn->ForEachTensor([&](std::string_view name, std::vector<size_t> shape,
                            std::span<const double> values) {
      if (name != "gating") weights[std::string(name)] = Tensor(shape, values);
    });
  } else {
    const auto &linear = std::get<LinearParams>(model.params);
    j["model"] = "linear";
    weights["w_local"] = Tensor({linear.w_local.size()}, linear.w_local);
    weights["w_pair"] = Tensor({linear.w_pair.size()}, linear.w_pair);
  }
  j["weights"] = std::move(weights);
  return j.dump(1) + "\n";
}

Model ParseModel(std::string_view text) {
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error("unsupported model format_version " + std::to_string(version));
    }
    Model model;
    model.feature_set = ParseFeatureSet(j.at("feature_set").get<std::string>());
    model.train_config = j.value("train_config", json::object());
    const size_t d_l = UnaryDim(model.feature_set);
    const size_t d_g = BinaryDim(model.feature_set);
    const json &weights = j.at("weights");
    const std::string kind = j.at("model").get<std::string>();
    if (kind == "burn") {
      const int h = j.at("h").get<int>();
      BurnParams p = BurnParams::Zeros(d_l, d_g, h);
      p.leaky_slope = j.at("leaky_slope").get<double>();
      const auto gating = j.at("gating").get<std::vector<double>>();
      if (gating.size() != p.gating.values.size()) {
        throw Error("gating table must have " +
                    std::to_string(p.gating.values.size()) + " entries");
      }
      std::copy(gating.begin(), gating.end(), p.gating.values.begin());
      p.ForEachTensor([&](std::string_view name, std::vector<size_t> shape,
                          std::span<double> values) {
        if (name == "gating") return;
        const auto data = ReadTensor(weights, std::string(name), shape);
        std::copy(data.begin(), data.end(), values.begin());
      });
      model.params = std::move(p);
    } else if (kind == "linear") {
      model.params = LinearParams{ReadTensor(weights, "w_local", {d_l}),
                                  ReadTensor(weights, "w_pair", {d_g})};
    } else {
      throw Error("unknown model kind '" + kind + "'");
    }
    return model;
  } catch (const json::exception &e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

void SaveModel(const Model &model, const std::filesystem::path &path) {
  const std::string text = SerializeModel(model);
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw Error("cannot write " + path.string());
}

Model LoadModel(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseModel(buffer.str());
  } catch (const Error &e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace xel
