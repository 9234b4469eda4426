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

#ifndef XEL_BURN_H_
#define XEL_BURN_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "xel/features.h"
#include "xel/objective.h"

namespace xel {

// Dense row-major matrix.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double &operator()(size_t r, size_t c) { return data[r * cols + c]; }
  double operator()(size_t r, size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix &, const Matrix &) = default;
};

// One learned scalar per token-distance bin. Distances are clamped to 50
// tokens and binned by 4, giving 13 bins.
struct GatingTable {
  static constexpr int kClamp = 50;
  static constexpr int kBinSize = 4;
  static constexpr int kNumBins = kClamp / kBinSize + 1;

  std::array<double, kNumBins> values{};

  static int Bin(int distance);

  friend bool operator==(const GatingTable &, const GatingTable &) = default;
};

double Gate(int distance, const GatingTable &table);

// Parameters of the belief update network. Both scorers are
//   s(x) = w2 . LeakyReLU(W1^T x) + w3 . x
// with W1 of shape (input dim x hidden).
struct BurnParams {
  int hidden = 0;
  double leaky_slope = 0.01;
  Matrix w_l1;
  std::vector<double> w_l2;
  std::vector<double> w_l3;
  Matrix w_g1;
  std::vector<double> w_g2;
  std::vector<double> w_g3;
  GatingTable gating;

  int unary_dim() const { return static_cast<int>(w_l3.size()); }
  int binary_dim() const { return static_cast<int>(w_g3.size()); }

  static BurnParams Zeros(int unary_dim, int binary_dim, int hidden);

  // Glorot-uniform weights from a seeded generator; every gate is 1/30.
  static BurnParams Initialize(int unary_dim, int binary_dim, int hidden,
                               uint64_t seed);

  // Visits every trainable tensor as (name, shape, values), always in the
  // order W_l1, W_l2, W_l3, W_g1, W_g2, W_g3, gating.
  void ForEachTensor(const std::function<void(std::string_view,
                                              std::vector<size_t>,
                                              std::span<double>)> &fn);
  void ForEachTensor(const std::function<void(std::string_view,
                                              std::vector<size_t>,
                                              std::span<const double>)> &fn)
      const;

  size_t NumParams() const;
  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> values);

  // Throws Error unless all shapes agree with the dimensions and hidden.
  void CheckShapes() const;

  friend bool operator==(const BurnParams &, const BurnParams &) = default;
};

double LeakyRelu(double z, double slope);

// w2 . LeakyReLU(W1^T x) + w3 . x. Throws Error on a shape mismatch.
double MlpScore(std::span<const double> x, const Matrix &w1,
                std::span<const double> w2, std::span<const double> w3,
                double slope);

struct InferenceConfig {
  int max_iterations = 20;
  double convergence_tol = 1e-6;  // on the max-abs change of any belief
  size_t context_window = 30;     // 0 = every featurized context mention

  void Validate() const;
};

// Beliefs after the last iteration. Mentions without candidates carry the
// single placeholder belief {1}.
struct BeliefState {
  std::vector<std::vector<double>> p;
  int iterations = 0;
  bool converged = false;

  // Most probable candidate per mention (first on ties).
  std::vector<std::optional<size_t>> Predictions(
      const FeatureTensors &tensors) const;
};

// Called with (t, beliefs) for t = 0 (local softmax) and each iteration.
using BeliefObserver =
    std::function<void(int, const std::vector<std::vector<double>> &)>;

// Iterative belief update:
//   p^0   = softmax(s_l)
//   s^t_ij = s_l(e_ij) + sum_k gate(d_ik) sum_w s_e(e_ij, e_kw) p^{t-1}_kw
//   p^t   = softmax(s^t)
// for t = 1..T, stopping early once no belief moves by tol or more. k runs
// over the nearest context_window context mentions.
BeliefState Infer(const FeatureTensors &tensors, const BurnParams &params,
                  const InferenceConfig &config,
                  const BeliefObserver &observer = nullptr);

// Hidden-unit dropout applied during training. Masks are drawn from a
// generator seeded with `seed`, so a (params, example, seed) triple always
// yields the same loss and gradient.
struct DropoutConfig {
  double rate = 0.0;
  uint64_t seed = 0;
};

// Loss -sum_i log p^T(gold_i) over mentions whose gold is a candidate, and
// when `grad` is non-null its exact gradient, added into `grad`, through all
// unrolled iterations, both scorers and the gating table.
LossResult LossAndGrad(const TrainingExample &example, const BurnParams &params,
                       const InferenceConfig &config, BurnParams *grad,
                       const DropoutConfig &dropout = {});

LossResult Loss(std::span<const TrainingExample> examples,
                const BurnParams &params, const InferenceConfig &config);

// Gradient of Loss, summed over examples in order.
BurnParams Grad(std::span<const TrainingExample> examples,
                const BurnParams &params, const InferenceConfig &config);

}  // namespace xel

#endif  // XEL_BURN_H_
