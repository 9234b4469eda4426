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

#ifndef XEL_TRAINER_H_
#define XEL_TRAINER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "xel/burn.h"
#include "xel/features.h"
#include "xel/linear_greedy.h"

namespace xel {

struct TrainConfig {
  int epochs = 1;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double dropout = 0.5;   // hidden units of both BURN scorers
  uint64_t seed = 0;
  size_t batch_size = 0;  // documents per update; 0 = whole corpus
  int jobs = 1;

  void Validate() const;
};

class Adam {
 public:
  Adam(size_t num_params, const TrainConfig &config);

  void Step(std::span<double> params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_;
  std::vector<double> v_;
  int64_t t_ = 0;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;      // full-corpus loss after the epoch, no dropout
  double accuracy = 0.0;  // over labeled mentions
};

struct TrainLog {
  double initial_loss = 0.0;
  double initial_accuracy = 0.0;
  size_t counted = 0;
  size_t excluded = 0;
  std::vector<EpochLog> epochs;
};

struct BurnTrainResult {
  BurnParams params;
  TrainLog log;
};

struct LinearTrainResult {
  LinearParams params;
  TrainLog log;
};

// Adam over per-document gradients. Each epoch visits the documents in a
// seeded shuffled order (in order when training full-batch), accumulating
// gradients in document order so results do not depend on `jobs`. Throws
// Error if no mention has its gold entity among its candidates.
BurnTrainResult TrainBurn(std::span<const TrainingExample> examples,
                          BurnParams init, const InferenceConfig &inference,
                          const TrainConfig &config);

LinearTrainResult TrainLinear(std::span<const TrainingExample> examples,
                              LinearParams init, const TrainConfig &config);

// Fraction of labeled mentions whose gold is the prediction.
double BurnAccuracy(std::span<const TrainingExample> examples,
                    const BurnParams &params, const InferenceConfig &inference,
                    int jobs = 1);
double GreedyAccuracy(std::span<const TrainingExample> examples,
                      const LinearParams &params, int jobs = 1);

}  // namespace xel

#endif  // XEL_TRAINER_H_
