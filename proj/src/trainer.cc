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

#include "xel/trainer.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "xel/error.h"
#include "xel/parallel.h"

namespace xel {

namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-(epoch, document) dropout seed.
uint64_t DropoutSeed(uint64_t seed, uint64_t epoch, uint64_t doc) {
  return SplitMix64(SplitMix64(SplitMix64(seed) ^ epoch) ^ doc);
}

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  size_t counted = 0;
  size_t excluded = 0;
};

using LossGradFn = std::function<LossResult(
    size_t doc, uint64_t dropout_seed, std::vector<double> *grad)>;
using EvaluateFn = std::function<Evaluation(std::span<const double> params)>;

size_t CountLabeled(const TrainingExample &example) {
  size_t n = 0;
  for (int g : example.gold) n += g != TrainingExample::kNoGold;
  return n;
}

template <typename PredictFn>
double AccuracyOf(std::span<const TrainingExample> examples, int jobs,
                  PredictFn &&predict) {
  std::vector<size_t> correct(examples.size(), 0);
  ParallelFor(examples.size(), jobs, [&](size_t d) {
    const std::vector<std::optional<size_t>> predictions = predict(examples[d]);
    for (size_t i = 0; i < predictions.size(); ++i) {
      const int gold = examples[d].gold[i];
      correct[d] += gold >= 0 && predictions[i] == static_cast<size_t>(gold);
    }
  });
  size_t hits = 0, labeled = 0;
  for (size_t d = 0; d < examples.size(); ++d) {
    hits += correct[d];
    labeled += CountLabeled(examples[d]);
  }
  return labeled == 0 ? 0.0 : static_cast<double>(hits) / labeled;
}

TrainLog RunAdam(size_t num_docs, std::vector<double> &params,
                 const TrainConfig &config, const LossGradFn &loss_grad,
                 const EvaluateFn &evaluate,
                 const std::function<void(std::span<const double>)> &sync) {
  config.Validate();
  TrainLog log;
  const Evaluation initial = evaluate(params);
  if (initial.counted == 0) {
    throw Error("nothing to train on: no mention has its gold entity among "
                "its candidates");
  }
  log.initial_loss = initial.loss;
  log.initial_accuracy = initial.accuracy;
  log.counted = initial.counted;
  log.excluded = initial.excluded;

  Adam adam(params.size(), config);
  std::mt19937_64 shuffler(SplitMix64(config.seed));
  const size_t batch = config.batch_size == 0
                           ? num_docs
                           : std::min(config.batch_size, num_docs);
  std::vector<size_t> order(num_docs);
  std::vector<std::vector<double>> grads(batch);
  std::vector<double> total(params.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    if (batch < num_docs) {
      for (size_t i = num_docs - 1; i > 0; --i) {
        std::swap(order[i], order[shuffler() % (i + 1)]);
      }
    }
    for (size_t start = 0; start < num_docs; start += batch) {
      const size_t size = std::min(batch, num_docs - start);
      ParallelFor(size, config.jobs, [&](size_t b) {
        grads[b].assign(params.size(), 0.0);
        const size_t doc = order[start + b];
        loss_grad(doc, DropoutSeed(config.seed, epoch, doc), &grads[b]);
      });
      std::fill(total.begin(), total.end(), 0.0);
      for (size_t b = 0; b < size; ++b) {
        for (size_t p = 0; p < total.size(); ++p) total[p] += grads[b][p];
      }
      adam.Step(params, total);
      sync(params);
    }
    const Evaluation e = evaluate(params);
    log.epochs.push_back({epoch, e.loss, e.accuracy});
  }
  return log;
}

}  // namespace

void TrainConfig::Validate() const {
  if (epochs < 0) throw Error("epochs must be non-negative");
  if (!(lr > 0.0)) throw Error("learning rate must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw Error("dropout must lie in [0,1)");
  }
  if (jobs < 1) throw Error("jobs must be at least 1");
}

Adam::Adam(size_t num_params, const TrainConfig &config)
    : lr_(config.lr),
      beta1_(config.beta1),
      beta2_(config.beta2),
      eps_(config.adam_eps),
      m_(num_params, 0.0),
      v_(num_params, 0.0) {}

void Adam::Step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error("Adam: parameter count mismatch");
  }
  ++t_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = m_[i] / correction1;
    const double v_hat = v_[i] / correction2;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

double BurnAccuracy(std::span<const TrainingExample> examples,
                    const BurnParams &params, const InferenceConfig &inference,
                    int jobs) {
  return AccuracyOf(examples, jobs, [&](const TrainingExample &example) {
    return Infer(example.tensors, params, inference).Predictions(example.tensors);
  });
}

double GreedyAccuracy(std::span<const TrainingExample> examples,
                      const LinearParams &params, int jobs) {
  return AccuracyOf(examples, jobs, [&](const TrainingExample &example) {
    std::vector<std::optional<size_t>> predictions;
    for (const MentionScores &s : GreedyLink(example.tensors, params)) {
      predictions.push_back(s.prediction);
    }
    return predictions;
  });
}

BurnTrainResult TrainBurn(std::span<const TrainingExample> examples,
                          BurnParams init, const InferenceConfig &inference,
                          const TrainConfig &config) {
  inference.Validate();
  BurnTrainResult result{std::move(init), {}};
  BurnParams &current = result.params;
  current.CheckShapes();
  std::vector<double> flat = current.Flatten();

  auto loss_grad = [&](size_t doc, uint64_t seed, std::vector<double> *grad) {
    BurnParams g = BurnParams::Zeros(current.unary_dim(), current.binary_dim(),
                                     current.hidden);
    const LossResult r = LossAndGrad(examples[doc], current, inference, &g,
                                     {config.dropout, seed});
    *grad = g.Flatten();
    return r;
  };
  auto evaluate = [&](std::span<const double>) {
    std::vector<LossResult> per_doc(examples.size());
    ParallelFor(examples.size(), config.jobs, [&](size_t d) {
      per_doc[d] = LossAndGrad(examples[d], current, inference, nullptr);
    });
    LossResult total;
    for (const LossResult &r : per_doc) total += r;
    return Evaluation{total.loss,
                      BurnAccuracy(examples, current, inference, config.jobs),
                      total.counted, total.excluded};
  };
  result.log = RunAdam(examples.size(), flat, config, loss_grad, evaluate,
                       [&](std::span<const double> p) { current.Unflatten(p); });
  return result;
}

LinearTrainResult TrainLinear(std::span<const TrainingExample> examples,
                              LinearParams init, const TrainConfig &config) {
  LinearTrainResult result{std::move(init), {}};
  LinearParams &current = result.params;
  std::vector<double> flat = current.Flatten();

  auto loss_grad = [&](size_t doc, uint64_t, std::vector<double> *grad) {
    LinearParams g = LinearParams::Zeros(current.w_local.size(),
                                         current.w_pair.size());
    const LossResult r = GreedyLossAndGrad(examples[doc], current, &g);
    *grad = g.Flatten();
    return r;
  };
  auto evaluate = [&](std::span<const double>) {
    std::vector<LossResult> per_doc(examples.size());
    ParallelFor(examples.size(), config.jobs, [&](size_t d) {
      per_doc[d] = GreedyLossAndGrad(examples[d], current, nullptr);
    });
    LossResult total;
    for (const LossResult &r : per_doc) total += r;
    return Evaluation{total.loss, GreedyAccuracy(examples, current, config.jobs),
                      total.counted, total.excluded};
  };
  result.log = RunAdam(examples.size(), flat, config, loss_grad, evaluate,
                       [&](std::span<const double> p) { current.Unflatten(p); });
  return result;
}

}  // namespace xel
