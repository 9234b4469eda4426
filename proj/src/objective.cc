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

#include "xel/objective.h"

#include <algorithm>
#include <cmath>

namespace xel {

void SoftmaxInPlace(std::span<double> scores) {
  if (scores.empty()) return;
  const double max = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double &s : scores) {
    s = std::exp(s - max);
    total += s;
  }
  for (double &s : scores) s /= total;
}

std::optional<size_t> ArgMax(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  size_t best = 0;
  for (size_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[best]) best = j;
  }
  return best;
}

}  // namespace xel
