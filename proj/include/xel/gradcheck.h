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

#ifndef XEL_GRADCHECK_H_
#define XEL_GRADCHECK_H_

#include <cstdint>
#include <random>

#include "xel/burn.h"
#include "xel/features.h"

namespace xel {

// Random featurized document: 1..max_mentions mentions with
// 1..max_candidates candidates each, every other mention in context at a
// random distance in [0, 60], features uniform in [-2, 2] and a random gold
// candidate per mention (some mentions unlabeled).
TrainingExample RandomExample(std::mt19937_64 &rng, int max_mentions,
                              int max_candidates, int unary_dim,
                              int binary_dim);

// Weights and gates uniform in [-1, 1].
BurnParams RandomParams(std::mt19937_64 &rng, int unary_dim, int binary_dim,
                        int hidden);

struct GradCheckConfig {
  int instances = 50;
  int max_mentions = 3;
  int max_candidates = 3;
  int hidden = 4;
  int max_iterations = 3;  // T is drawn from 1..max_iterations per instance
  double step = 1e-5;
  double tolerance = 1e-4;
};

struct GradCheckResult {
  int instances = 0;
  size_t coordinates = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

// |a - b| / max(|a|, |b|, 1e-6)
double RelativeError(double analytic, double numeric);

// Compares LossAndGrad against central differences of the loss for every
// parameter coordinate, dropout off, on random instances.
GradCheckResult RunGradCheck(uint64_t seed, const GradCheckConfig &config);

}  // namespace xel

#endif  // XEL_GRADCHECK_H_
