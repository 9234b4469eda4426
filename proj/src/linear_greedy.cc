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

#include "xel/linear_greedy.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "xel/error.h"

namespace xel {

namespace {

double Dot(std::span<const double> x, std::span<const double> w,
           const char *what) {
  if (x.size() != w.size()) {
    throw Error(std::string(what) + ": feature dimension " +
                std::to_string(x.size()) + " vs weight dimension " +
                std::to_string(w.size()));
  }
  double sum = 0.0;
  for (size_t d = 0; d < x.size(); ++d) sum += x[d] * w[d];
  return sum;
}

struct GreedyPass {
  std::vector<MentionScores> scores;
  // For each (mention i, context link n, candidate j): the maximizing w.
  std::vector<std::vector<std::vector<size_t>>> best;
};

GreedyPass RunGreedy(const FeatureTensors &t, const LinearParams &params) {
  const size_t num_mentions = t.num_mentions();
  GreedyPass pass;
  pass.scores.resize(num_mentions);
  pass.best.resize(num_mentions);
  const double inv_mentions = 1.0 / static_cast<double>(num_mentions);
  for (size_t i = 0; i < num_mentions; ++i) {
    const size_t k_i = t.num_candidates[i];
    MentionScores &s = pass.scores[i];
    s.local.resize(k_i);
    s.global.assign(k_i, 0.0);
    pass.best[i].assign(t.context[i].size(), std::vector<size_t>(k_i, 0));
    for (size_t j = 0; j < k_i; ++j) {
      s.local[j] = LocalScore(t.Unary(i, j), params.w_local);
    }
    for (size_t n = 0; n < t.context[i].size(); ++n) {
      const size_t k_k = t.num_candidates[t.context[i][n].mention];
      for (size_t j = 0; j < k_i; ++j) {
        double evidence = 0.0;
        for (size_t w = 0; w < k_k; ++w) {
          const double pair = PairScore(t.Binary(i, n, j, w), params.w_pair);
          if (w == 0 || pair > evidence) {
            evidence = pair;
            pass.best[i][n][j] = w;
          }
        }
        s.global[j] += evidence;
      }
    }
    s.total.resize(k_i);
    for (size_t j = 0; j < k_i; ++j) {
      s.global[j] *= inv_mentions;
      s.total[j] = s.local[j] + s.global[j];
    }
    s.prediction = ArgMax(s.total);
  }
  return pass;
}

}  // namespace

LinearParams LinearParams::Zeros(int unary_dim, int binary_dim) {
  return {std::vector<double>(unary_dim, 0.0),
          std::vector<double>(binary_dim, 0.0)};
}

std::vector<double> LinearParams::Flatten() const {
  std::vector<double> flat(w_local);
  flat.insert(flat.end(), w_pair.begin(), w_pair.end());
  return flat;
}

void LinearParams::Unflatten(std::span<const double> values) {
  if (values.size() != NumParams()) throw Error("parameter count mismatch");
  std::copy_n(values.begin(), w_local.size(), w_local.begin());
  std::copy(values.begin() + w_local.size(), values.end(), w_pair.begin());
}

double LocalScore(std::span<const double> phi, std::span<const double> w_local) {
  return Dot(phi, w_local, "local score");
}

double PairScore(std::span<const double> psi, std::span<const double> w_pair) {
  return Dot(psi, w_pair, "pair score");
}

std::vector<MentionScores> GreedyLink(const FeatureTensors &tensors,
                                      const LinearParams &params) {
  return RunGreedy(tensors, params).scores;
}

LossResult GreedyLossAndGrad(const TrainingExample &example,
                             const LinearParams &params, LinearParams *grad) {
  const FeatureTensors &t = example.tensors;
  if (example.gold.size() != t.num_mentions()) {
    throw Error("gold labels do not match the mention count");
  }
  const GreedyPass pass = RunGreedy(t, params);
  const double inv_mentions = 1.0 / static_cast<double>(t.num_mentions());
  LossResult result;
  for (size_t i = 0; i < t.num_mentions(); ++i) {
    const int gold = example.gold[i];
    if (gold == TrainingExample::kGoldMissing) ++result.excluded;
    if (gold < 0) continue;
    std::vector<double> p = pass.scores[i].total;
    SoftmaxInPlace(p);
    result.loss -= std::log(p[gold]);
    ++result.counted;
    if (grad == nullptr) continue;
    // d loss / d s_ij = p_ij - [j == gold]
    for (size_t j = 0; j < p.size(); ++j) {
      const double delta = p[j] - (static_cast<int>(j) == gold ? 1.0 : 0.0);
      const auto phi = t.Unary(i, j);
      for (size_t d = 0; d < phi.size(); ++d) grad->w_local[d] += delta * phi[d];
      for (size_t n = 0; n < t.context[i].size(); ++n) {
        const auto psi = t.Binary(i, n, j, pass.best[i][n][j]);
        for (size_t d = 0; d < psi.size(); ++d) {
          grad->w_pair[d] += delta * inv_mentions * psi[d];
        }
      }
    }
  }
  return result;
}

}  // namespace xel
