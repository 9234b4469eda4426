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

#ifndef XEL_LINEAR_GREEDY_H_
#define XEL_LINEAR_GREEDY_H_

#include <optional>
#include <span>
#include <vector>

#include "xel/features.h"
#include "xel/objective.h"

namespace xel {

struct LinearParams {
  std::vector<double> w_local;
  std::vector<double> w_pair;

  static LinearParams Zeros(int unary_dim, int binary_dim);

  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> values);
  size_t NumParams() const { return w_local.size() + w_pair.size(); }

  friend bool operator==(const LinearParams &, const LinearParams &) = default;
};

// Dot products; throw Error on a dimension mismatch.
double LocalScore(std::span<const double> phi, std::span<const double> w_local);
double PairScore(std::span<const double> psi, std::span<const double> w_pair);

struct MentionScores {
  std::optional<size_t> prediction;  // none for a mention without candidates
  std::vector<double> local;
  std::vector<double> global;
  std::vector<double> total;
};

// Linear scoring with greedy mention evidence:
//   s_m(k, e) = max_w s_e(e, e_kw)
//   s_g(e)    = (1/|M_D|) * sum over context mentions k of s_m(k, e)
//   s(e)      = s_l(e) + s_g(e)
// |M_D| counts every mention of the document. The prediction is the first
// candidate with the largest s.
std::vector<MentionScores> GreedyLink(const FeatureTensors &tensors,
                                      const LinearParams &params);

// Softmax cross-entropy of the greedy scores against the gold candidates.
// The max in s_m is differentiated through its first maximizer. `grad` may
// be null; otherwise gradients are added to it.
LossResult GreedyLossAndGrad(const TrainingExample &example,
                             const LinearParams &params, LinearParams *grad);

}  // namespace xel

#endif  // XEL_LINEAR_GREEDY_H_
