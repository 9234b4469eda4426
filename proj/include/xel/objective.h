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

#ifndef XEL_OBJECTIVE_H_
#define XEL_OBJECTIVE_H_

#include <cstddef>
#include <optional>
#include <span>

namespace xel {

// Negative log-likelihood of gold entities. `excluded` counts labeled
// mentions whose gold entity is not a candidate.
struct LossResult {
  double loss = 0.0;
  size_t counted = 0;
  size_t excluded = 0;

  LossResult &operator+=(const LossResult &other) {
    loss += other.loss;
    counted += other.counted;
    excluded += other.excluded;
    return *this;
  }
};

// Replaces scores by their softmax (max-shifted).
void SoftmaxInPlace(std::span<double> scores);

// Index of the largest value, first one on ties; nullopt when empty.
std::optional<size_t> ArgMax(std::span<const double> values);

}  // namespace xel

#endif  // XEL_OBJECTIVE_H_
