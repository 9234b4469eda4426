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

#include "xel/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xel {

namespace {

double Uniform(std::mt19937_64 &rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int UniformInt(std::mt19937_64 &rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

}  // namespace

TrainingExample RandomExample(std::mt19937_64 &rng, int max_mentions,
                              int max_candidates, int unary_dim,
                              int binary_dim) {
  const int num_mentions = UniformInt(rng, 1, max_mentions);
  std::vector<size_t> num_candidates(num_mentions);
  for (auto &k : num_candidates) k = UniformInt(rng, 1, max_candidates);
  std::vector<std::vector<std::pair<size_t, int>>> context(num_mentions);
  for (int i = 0; i < num_mentions; ++i) {
    for (int k = 0; k < num_mentions; ++k) {
      if (k != i) context[i].emplace_back(k, UniformInt(rng, 0, 60));
    }
    std::stable_sort(context[i].begin(), context[i].end(),
                     [](auto &a, auto &b) { return a.second < b.second; });
  }
  TrainingExample example{
      FeatureTensors::Allocate(unary_dim, binary_dim, num_candidates, context),
      {}};
  for (double &v : example.tensors.unary) v = Uniform(rng, -2.0, 2.0);
  for (double &v : example.tensors.binary) v = Uniform(rng, -2.0, 2.0);
  for (int i = 0; i < num_mentions; ++i) {
    example.gold.push_back(
        Uniform(rng, 0.0, 1.0) < 0.1
            ? TrainingExample::kNoGold
            : UniformInt(rng, 0, static_cast<int>(num_candidates[i]) - 1));
  }
  return example;
}

BurnParams RandomParams(std::mt19937_64 &rng, int unary_dim, int binary_dim,
                        int hidden) {
  BurnParams params = BurnParams::Zeros(unary_dim, binary_dim, hidden);
  params.ForEachTensor([&](std::string_view, std::vector<size_t>,
                           std::span<double> values) {
    for (double &v : values) v = Uniform(rng, -1.0, 1.0);
  });
  return params;
}

double RelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

GradCheckResult RunGradCheck(uint64_t seed, const GradCheckConfig &config) {
  std::mt19937_64 rng(seed);
  GradCheckResult result;
  for (int n = 0; n < config.instances; ++n) {
    const int d_l = UniformInt(rng, 1, 4);
    const int d_g = UniformInt(rng, 1, 4);
    const TrainingExample example = RandomExample(
        rng, config.max_mentions, config.max_candidates, d_l, d_g);
    BurnParams params = RandomParams(rng, d_l, d_g, config.hidden);
    InferenceConfig inference;
    inference.max_iterations = UniformInt(rng, 1, config.max_iterations);
    // A fixed unroll keeps the loss a smooth function of the parameters.
    inference.convergence_tol = std::numeric_limits<double>::min();

    BurnParams grad = BurnParams::Zeros(d_l, d_g, config.hidden);
    LossAndGrad(example, params, inference, &grad);
    const std::vector<double> analytic = grad.Flatten();
    std::vector<double> flat = params.Flatten();
    for (size_t c = 0; c < flat.size(); ++c) {
      const double saved = flat[c];
      flat[c] = saved + config.step;
      params.Unflatten(flat);
      const double plus = LossAndGrad(example, params, inference, nullptr).loss;
      flat[c] = saved - config.step;
      params.Unflatten(flat);
      const double minus = LossAndGrad(example, params, inference, nullptr).loss;
      flat[c] = saved;
      const double numeric = (plus - minus) / (2.0 * config.step);
      result.max_relative_error =
          std::max(result.max_relative_error, RelativeError(analytic[c], numeric));
      ++result.coordinates;
    }
    params.Unflatten(flat);
    ++result.instances;
  }
  result.passed = result.max_relative_error <= config.tolerance;
  return result;
}

}  // namespace xel
