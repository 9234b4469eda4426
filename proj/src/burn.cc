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

#include "xel/burn.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "xel/error.h"

namespace xel {

namespace {

constexpr double kInitialGate = 1.0 / 30.0;

// Uniform in [0,1) from the top 53 bits; identical on every platform.
double UnitUniform(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::mt19937_64 SeededEngine(uint64_t seed) {
  std::seed_seq seq{static_cast<uint32_t>(seed),
                    static_cast<uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

// Keep/drop flags for the hidden units of a sequence of scorer evaluations.
class DropoutMasks {
 public:
  DropoutMasks() = default;
  DropoutMasks(const DropoutConfig &config, size_t hidden, size_t evaluations)
      : hidden_(hidden) {
    if (config.rate <= 0.0) return;
    if (config.rate >= 1.0) throw Error("dropout rate must be below 1");
    scale_ = 1.0 / (1.0 - config.rate);
    std::mt19937_64 rng = SeededEngine(config.seed);
    keep_.resize(hidden * evaluations);
    for (auto &k : keep_) k = UnitUniform(rng) >= config.rate;
  }

  const uint8_t *mask(size_t evaluation) const {
    return keep_.empty() ? nullptr : keep_.data() + evaluation * hidden_;
  }
  double scale() const { return scale_; }

 private:
  size_t hidden_ = 0;
  double scale_ = 1.0;
  std::vector<uint8_t> keep_;
};

struct ScorerRef {
  const Matrix &w1;
  std::span<const double> w2;
  std::span<const double> w3;
};

struct ScorerGrad {
  Matrix &w1;
  std::vector<double> &w2;
  std::vector<double> &w3;
};

double Forward(std::span<const double> x, const ScorerRef &s, double slope,
               const uint8_t *keep, double scale) {
  const size_t dim = x.size();
  double out = 0.0;
  for (size_t h = 0; h < s.w2.size(); ++h) {
    double a = 0.0;
    for (size_t d = 0; d < dim; ++d) a += x[d] * s.w1(d, h);
    double act = LeakyRelu(a, slope);
    if (keep != nullptr) act *= keep[h] ? scale : 0.0;
    out += s.w2[h] * act;
  }
  for (size_t d = 0; d < dim; ++d) out += s.w3[d] * x[d];
  return out;
}

void Backward(std::span<const double> x, const ScorerRef &s, double slope,
              const uint8_t *keep, double scale, double upstream,
              ScorerGrad &g) {
  const size_t dim = x.size();
  for (size_t d = 0; d < dim; ++d) g.w3[d] += upstream * x[d];
  for (size_t h = 0; h < s.w2.size(); ++h) {
    double a = 0.0;
    for (size_t d = 0; d < dim; ++d) a += x[d] * s.w1(d, h);
    const double m = keep != nullptr ? (keep[h] ? scale : 0.0) : 1.0;
    g.w2[h] += upstream * LeakyRelu(a, slope) * m;
    const double da = upstream * s.w2[h] * m * (a > 0.0 ? 1.0 : slope);
    for (size_t d = 0; d < dim; ++d) g.w1(d, h) += da * x[d];
  }
}

void CheckCompatible(const FeatureTensors &t, const BurnParams &params) {
  params.CheckShapes();
  if (t.unary_dim != params.unary_dim() || t.binary_dim != params.binary_dim()) {
    throw Error("feature dimensions (" + std::to_string(t.unary_dim) + "," +
                std::to_string(t.binary_dim) + ") do not match the model (" +
                std::to_string(params.unary_dim()) + "," +
                std::to_string(params.binary_dim()) + ")");
  }
}

size_t NumContext(const FeatureTensors &t, size_t i, size_t window) {
  const size_t available = t.context[i].size();
  return window == 0 ? available : std::min(window, available);
}

size_t PairIndex(const FeatureTensors &t, const ContextLink &link, size_t j,
                 size_t w) {
  return link.offset / t.binary_dim + j * t.num_candidates[link.mention] + w;
}

using Beliefs = std::vector<std::vector<double>>;

struct ForwardPass {
  Beliefs local;                   // s_l per mention and candidate
  std::vector<double> pair;        // s_e, indexed by PairIndex
  Beliefs gates;                   // per mention and used context link
  std::vector<Beliefs> beliefs;    // p^0 .. p^T
  Beliefs final_scores;            // s^T
  int iterations = 0;
  bool converged = false;
};

ForwardPass RunForward(const FeatureTensors &t, const BurnParams &params,
                       const InferenceConfig &config,
                       const DropoutMasks &local_masks,
                       const DropoutMasks &pair_masks,
                       const BeliefObserver &observer) {
  const size_t num_mentions = t.num_mentions();
  const ScorerRef local_scorer{params.w_l1, params.w_l2, params.w_l3};
  const ScorerRef pair_scorer{params.w_g1, params.w_g2, params.w_g3};
  const double slope = params.leaky_slope;

  ForwardPass f;
  f.local.resize(num_mentions);
  f.gates.resize(num_mentions);
  f.pair.assign(t.binary.size() / t.binary_dim, 0.0);
  for (size_t i = 0; i < num_mentions; ++i) {
    const size_t k_i = t.num_candidates[i];
    f.local[i].resize(k_i);
    for (size_t j = 0; j < k_i; ++j) {
      const size_t e = t.unary_offset[i] / t.unary_dim + j;
      f.local[i][j] = Forward(t.Unary(i, j), local_scorer, slope,
                              local_masks.mask(e), local_masks.scale());
    }
    const size_t n_ctx = NumContext(t, i, config.context_window);
    for (size_t n = 0; n < n_ctx; ++n) {
      const ContextLink &link = t.context[i][n];
      f.gates[i].push_back(Gate(link.distance, params.gating));
      for (size_t j = 0; j < k_i; ++j) {
        for (size_t w = 0; w < t.num_candidates[link.mention]; ++w) {
          const size_t e = PairIndex(t, link, j, w);
          f.pair[e] = Forward(t.Binary(i, n, j, w), pair_scorer, slope,
                              pair_masks.mask(e), pair_masks.scale());
        }
      }
    }
  }

  Beliefs p(num_mentions);
  for (size_t i = 0; i < num_mentions; ++i) {
    if (t.num_candidates[i] == 0) {
      p[i] = {1.0};
    } else {
      p[i] = f.local[i];
      SoftmaxInPlace(p[i]);
    }
  }
  if (observer) observer(0, p);
  f.beliefs.push_back(std::move(p));

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const Beliefs &prev = f.beliefs.back();
    Beliefs scores(num_mentions);
    Beliefs next(num_mentions);
    double change = 0.0;
    for (size_t i = 0; i < num_mentions; ++i) {
      const size_t k_i = t.num_candidates[i];
      if (k_i == 0) {
        next[i] = {1.0};
        continue;
      }
      scores[i] = f.local[i];
      for (size_t n = 0; n < f.gates[i].size(); ++n) {
        const ContextLink &link = t.context[i][n];
        const std::vector<double> &p_k = prev[link.mention];
        for (size_t j = 0; j < k_i; ++j) {
          double evidence = 0.0;
          for (size_t w = 0; w < p_k.size(); ++w) {
            evidence += f.pair[PairIndex(t, link, j, w)] * p_k[w];
          }
          scores[i][j] += f.gates[i][n] * evidence;
        }
      }
      next[i] = scores[i];
      SoftmaxInPlace(next[i]);
      for (size_t j = 0; j < k_i; ++j) {
        change = std::max(change, std::abs(next[i][j] - prev[i][j]));
      }
    }
    if (observer) observer(iter, next);
    f.beliefs.push_back(std::move(next));
    f.final_scores = std::move(scores);
    f.iterations = iter;
    if (change < config.convergence_tol) {
      f.converged = true;
      break;
    }
  }
  return f;
}

double LogSumExp(const std::vector<double> &z) {
  const double max = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - max);
  return max + std::log(total);
}

}  // namespace

int GatingTable::Bin(int distance) {
  if (distance < 0) throw Error("negative mention distance");
  return std::min(distance, kClamp) / kBinSize;
}

double Gate(int distance, const GatingTable &table) {
  return table.values[GatingTable::Bin(distance)];
}

BurnParams BurnParams::Zeros(int unary_dim, int binary_dim, int hidden) {
  if (unary_dim < 1 || binary_dim < 1 || hidden < 1) {
    throw Error("BURN dimensions must be positive");
  }
  BurnParams p;
  p.hidden = hidden;
  p.w_l1 = Matrix(unary_dim, hidden);
  p.w_l2.assign(hidden, 0.0);
  p.w_l3.assign(unary_dim, 0.0);
  p.w_g1 = Matrix(binary_dim, hidden);
  p.w_g2.assign(hidden, 0.0);
  p.w_g3.assign(binary_dim, 0.0);
  return p;
}

BurnParams BurnParams::Initialize(int unary_dim, int binary_dim, int hidden,
                                  uint64_t seed) {
  BurnParams p = Zeros(unary_dim, binary_dim, hidden);
  std::mt19937_64 rng = SeededEngine(seed);
  auto fill = [&](std::span<double> values, size_t fan_in, size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double &v : values) v = (2.0 * UnitUniform(rng) - 1.0) * limit;
  };
  fill(p.w_l1.data, unary_dim, hidden);
  fill(p.w_l2, hidden, 1);
  fill(p.w_l3, unary_dim, 1);
  fill(p.w_g1.data, binary_dim, hidden);
  fill(p.w_g2, hidden, 1);
  fill(p.w_g3, binary_dim, 1);
  p.gating.values.fill(kInitialGate);
  return p;
}

void BurnParams::ForEachTensor(
    const std::function<void(std::string_view, std::vector<size_t>,
                             std::span<double>)> &fn) {
  fn("W_l1", {w_l1.rows, w_l1.cols}, w_l1.data);
  fn("W_l2", {w_l2.size()}, w_l2);
  fn("W_l3", {w_l3.size()}, w_l3);
  fn("W_g1", {w_g1.rows, w_g1.cols}, w_g1.data);
  fn("W_g2", {w_g2.size()}, w_g2);
  fn("W_g3", {w_g3.size()}, w_g3);
  fn("gating", {gating.values.size()}, gating.values);
}

void BurnParams::ForEachTensor(
    const std::function<void(std::string_view, std::vector<size_t>,
                             std::span<const double>)> &fn) const {
  const_cast<BurnParams *>(this)->ForEachTensor(
      [&](std::string_view name, std::vector<size_t> shape,
          std::span<double> values) { fn(name, std::move(shape), values); });
}

size_t BurnParams::NumParams() const {
  size_t n = 0;
  ForEachTensor([&](std::string_view, std::vector<size_t>,
                    std::span<const double> v) { n += v.size(); });
  return n;
}

std::vector<double> BurnParams::Flatten() const {
  std::vector<double> flat;
  flat.reserve(NumParams());
  ForEachTensor([&](std::string_view, std::vector<size_t>,
                    std::span<const double> v) {
    flat.insert(flat.end(), v.begin(), v.end());
  });
  return flat;
}

void BurnParams::Unflatten(std::span<const double> values) {
  if (values.size() != NumParams()) throw Error("parameter count mismatch");
  size_t offset = 0;
  ForEachTensor([&](std::string_view, std::vector<size_t>,
                    std::span<double> v) {
    std::copy_n(values.begin() + offset, v.size(), v.begin());
    offset += v.size();
  });
}

void BurnParams::CheckShapes() const {
  const size_t h = static_cast<size_t>(hidden);
  const bool ok = hidden > 0 && !w_l3.empty() && !w_g3.empty() &&
                  w_l1.rows == w_l3.size() && w_l1.cols == h &&
                  w_l1.data.size() == w_l1.rows * h && w_l2.size() == h &&
                  w_g1.rows == w_g3.size() && w_g1.cols == h &&
                  w_g1.data.size() == w_g1.rows * h && w_g2.size() == h;
  if (!ok) throw Error("inconsistent BURN parameter shapes");
}

double LeakyRelu(double z, double slope) { return z > 0.0 ? z : slope * z; }

double MlpScore(std::span<const double> x, const Matrix &w1,
                std::span<const double> w2, std::span<const double> w3,
                double slope) {
  if (w1.rows != x.size() || w3.size() != x.size() || w1.cols != w2.size() ||
      w1.data.size() != w1.rows * w1.cols) {
    throw Error("scorer shape mismatch");
  }
  return Forward(x, ScorerRef{w1, w2, w3}, slope, nullptr, 1.0);
}

void InferenceConfig::Validate() const {
  if (max_iterations < 1) throw Error("max_iterations must be at least 1");
  if (!(convergence_tol > 0.0)) throw Error("convergence_tol must be positive");
}

std::vector<std::optional<size_t>> BeliefState::Predictions(
    const FeatureTensors &tensors) const {
  std::vector<std::optional<size_t>> predictions(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    if (tensors.num_candidates[i] > 0) predictions[i] = ArgMax(p[i]);
  }
  return predictions;
}

BeliefState Infer(const FeatureTensors &tensors, const BurnParams &params,
                  const InferenceConfig &config,
                  const BeliefObserver &observer) {
  config.Validate();
  CheckCompatible(tensors, params);
  ForwardPass f = RunForward(tensors, params, config, DropoutMasks(),
                             DropoutMasks(), observer);
  return {std::move(f.beliefs.back()), f.iterations, f.converged};
}

LossResult LossAndGrad(const TrainingExample &example, const BurnParams &params,
                       const InferenceConfig &config, BurnParams *grad,
                       const DropoutConfig &dropout) {
  config.Validate();
  const FeatureTensors &t = example.tensors;
  CheckCompatible(t, params);
  if (example.gold.size() != t.num_mentions()) {
    throw Error("gold labels do not match the mention count");
  }
  const size_t num_mentions = t.num_mentions();
  const size_t hidden = static_cast<size_t>(params.hidden);

  DropoutMasks local_masks;
  DropoutMasks pair_masks;
  if (dropout.rate > 0.0) {
    const size_t local_evals = t.unary.size() / t.unary_dim;
    local_masks = DropoutMasks(dropout, hidden, local_evals);
    pair_masks = DropoutMasks({dropout.rate, dropout.seed ^ 0x5bd1e995ULL},
                              hidden, t.binary.size() / t.binary_dim);
  }
  ForwardPass f =
      RunForward(t, params, config, local_masks, pair_masks, nullptr);

  LossResult result;
  Beliefs dz(num_mentions);
  const Beliefs &final_p = f.beliefs.back();
  for (size_t i = 0; i < num_mentions; ++i) {
    dz[i].assign(t.num_candidates[i], 0.0);
    const int gold = example.gold[i];
    if (gold == TrainingExample::kGoldMissing) ++result.excluded;
    if (gold < 0) continue;
    if (static_cast<size_t>(gold) >= t.num_candidates[i]) {
      throw Error("gold index out of range");
    }
    result.loss += LogSumExp(f.final_scores[i]) - f.final_scores[i][gold];
    ++result.counted;
    for (size_t j = 0; j < dz[i].size(); ++j) {
      dz[i][j] = final_p[i][j] - (static_cast<int>(j) == gold ? 1.0 : 0.0);
    }
  }
  if (grad == nullptr) return result;
  grad->CheckShapes();
  if (grad->unary_dim() != params.unary_dim() ||
      grad->binary_dim() != params.binary_dim() ||
      grad->hidden != params.hidden) {
    throw Error("gradient buffer does not match the parameters");
  }

  Beliefs d_local(num_mentions);
  for (size_t i = 0; i < num_mentions; ++i) {
    d_local[i].assign(t.num_candidates[i], 0.0);
  }
  std::vector<double> d_pair(f.pair.size(), 0.0);

  // Back through the unrolled iterations; dz holds d loss / d s^t.
  for (int iter = f.iterations; iter >= 1; --iter) {
    const Beliefs &prev = f.beliefs[iter - 1];
    Beliefs d_prev(num_mentions);
    for (size_t i = 0; i < num_mentions; ++i) {
      d_prev[i].assign(t.num_candidates[i], 0.0);
    }
    for (size_t i = 0; i < num_mentions; ++i) {
      for (size_t j = 0; j < dz[i].size(); ++j) {
        const double upstream = dz[i][j];
        if (upstream == 0.0) continue;
        d_local[i][j] += upstream;
        for (size_t n = 0; n < f.gates[i].size(); ++n) {
          const ContextLink &link = t.context[i][n];
          const std::vector<double> &p_k = prev[link.mention];
          const double gate = f.gates[i][n];
          double evidence = 0.0;
          for (size_t w = 0; w < p_k.size(); ++w) {
            const size_t e = PairIndex(t, link, j, w);
            evidence += f.pair[e] * p_k[w];
            d_pair[e] += upstream * gate * p_k[w];
            d_prev[link.mention][w] += upstream * gate * f.pair[e];
          }
          grad->gating.values[GatingTable::Bin(link.distance)] +=
              upstream * evidence;
        }
      }
    }
    // Softmax Jacobian: d s = p * (d p - <d p, p>).
    for (size_t i = 0; i < num_mentions; ++i) {
      double inner = 0.0;
      for (size_t j = 0; j < d_prev[i].size(); ++j) {
        inner += d_prev[i][j] * prev[i][j];
      }
      for (size_t j = 0; j < d_prev[i].size(); ++j) {
        dz[i][j] = prev[i][j] * (d_prev[i][j] - inner);
      }
    }
  }
  // dz is now the gradient of the p^0 logits, which are the local scores.
  for (size_t i = 0; i < num_mentions; ++i) {
    for (size_t j = 0; j < dz[i].size(); ++j) d_local[i][j] += dz[i][j];
  }

  const ScorerRef local_scorer{params.w_l1, params.w_l2, params.w_l3};
  const ScorerRef pair_scorer{params.w_g1, params.w_g2, params.w_g3};
  ScorerGrad local_grad{grad->w_l1, grad->w_l2, grad->w_l3};
  ScorerGrad pair_grad{grad->w_g1, grad->w_g2, grad->w_g3};
  const double slope = params.leaky_slope;
  for (size_t i = 0; i < num_mentions; ++i) {
    for (size_t j = 0; j < t.num_candidates[i]; ++j) {
      if (d_local[i][j] == 0.0) continue;
      const size_t e = t.unary_offset[i] / t.unary_dim + j;
      Backward(t.Unary(i, j), local_scorer, slope, local_masks.mask(e),
               local_masks.scale(), d_local[i][j], local_grad);
    }
    for (size_t n = 0; n < f.gates[i].size(); ++n) {
      const ContextLink &link = t.context[i][n];
      for (size_t j = 0; j < t.num_candidates[i]; ++j) {
        for (size_t w = 0; w < t.num_candidates[link.mention]; ++w) {
          const size_t e = PairIndex(t, link, j, w);
          if (d_pair[e] == 0.0) continue;
          Backward(t.Binary(i, n, j, w), pair_scorer, slope, pair_masks.mask(e),
                   pair_masks.scale(), d_pair[e], pair_grad);
        }
      }
    }
  }
  return result;
}

LossResult Loss(std::span<const TrainingExample> examples,
                const BurnParams &params, const InferenceConfig &config) {
  LossResult total;
  for (const TrainingExample &example : examples) {
    total += LossAndGrad(example, params, config, nullptr);
  }
  return total;
}

BurnParams Grad(std::span<const TrainingExample> examples,
                const BurnParams &params, const InferenceConfig &config) {
  BurnParams grad =
      BurnParams::Zeros(params.unary_dim(), params.binary_dim(), params.hidden);
  grad.leaky_slope = params.leaky_slope;
  for (const TrainingExample &example : examples) {
    LossAndGrad(example, params, config, &grad);
  }
  return grad;
}

}  // namespace xel
