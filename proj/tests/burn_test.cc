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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "xel/error.h"
#include "xel/gradcheck.h"

namespace xel {
namespace {

TEST(MlpScoreTest, ZeroWeights) {
  const std::vector<double> x = {1.5, -2.0};
  EXPECT_EQ(MlpScore(x, Matrix(2, 3), std::vector<double>(3), std::vector<double>(2), 0.01),
            0.0);
}

TEST(MlpScoreTest, ResidualPathOnly) {
  const std::vector<double> x = {1.5, -2.0, 4.0};
  EXPECT_DOUBLE_EQ(MlpScore(x, Matrix(3, 2), std::vector<double>{7, 8},
                            std::vector<double>{1, 1, 1}, 0.01),
                   3.5);
}

TEST(MlpScoreTest, MatchesScalarLoop) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t d = 1 + rng() % 4, h = 1 + rng() % 6;
    Matrix w1(d, h);
    std::vector<double> x(d), w2(h), w3(d);
    for (double &v : w1.data) v = u(rng);
    for (double &v : x) v = u(rng);
    for (double &v : w2) v = u(rng);
    for (double &v : w3) v = u(rng);
    double expected = 0;
    for (size_t c = 0; c < h; ++c) {
      double z = 0;
      for (size_t r = 0; r < d; ++r) z += w1(r, c) * x[r];
      expected += w2[c] * (z > 0 ? z : 0.01 * z);
    }
    for (size_t r = 0; r < d; ++r) expected += w3[r] * x[r];
    EXPECT_NEAR(MlpScore(x, w1, w2, w3, 0.01), expected, 1e-12);
  }
}

TEST(MlpScoreTest, ShapeMismatch) {
  EXPECT_THROW(MlpScore(std::vector<double>{1, 2}, Matrix(3, 2), std::vector<double>(2),
                        std::vector<double>(2), 0.01),
               Error);
}

TEST(LeakyReluTest, Values) {
  EXPECT_EQ(LeakyRelu(2.0, 0.01), 2.0);
  EXPECT_EQ(LeakyRelu(-2.0, 0.01), -0.02);
  EXPECT_EQ(LeakyRelu(0.0, 0.01), 0.0);
}

TEST(GateTest, Bins) {
  EXPECT_EQ(GatingTable::kNumBins, 13);
  EXPECT_EQ(GatingTable::Bin(7), 1);
  EXPECT_EQ(GatingTable::Bin(53), 12);
  EXPECT_EQ(GatingTable::Bin(0), 0);
  EXPECT_EQ(GatingTable::Bin(3), 0);
  EXPECT_EQ(GatingTable::Bin(4), 1);
  EXPECT_EQ(GatingTable::Bin(47), 11);
  EXPECT_EQ(GatingTable::Bin(48), 12);
  EXPECT_EQ(GatingTable::Bin(50), 12);
  GatingTable table;
  for (int b = 0; b < 13; ++b) table.values[b] = b * 10.0;
  EXPECT_EQ(Gate(7, table), 10.0);
  EXPECT_EQ(Gate(1000, table), 120.0);
  EXPECT_THROW(Gate(-1, table), Error);
}

TEST(BurnParamsTest, InitializeIsSeededGlorot) {
  const BurnParams a = BurnParams::Initialize(4, 4, 128, 9);
  const BurnParams b = BurnParams::Initialize(4, 4, 128, 9);
  const BurnParams c = BurnParams::Initialize(4, 4, 128, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.Flatten(), c.Flatten());
  EXPECT_EQ(a.hidden, 128);
  EXPECT_EQ(a.leaky_slope, 0.01);
  for (double g : a.gating.values) EXPECT_DOUBLE_EQ(g, 1.0 / 30.0);
  const double bound = std::sqrt(6.0 / (4 + 128));
  for (double v : a.w_l1.data) EXPECT_LE(std::abs(v), bound);
  EXPECT_EQ(a.NumParams(), 2 * (4 * 128 + 128 + 4) + 13u);
  a.CheckShapes();
}

TEST(BurnParamsTest, FlattenRoundTrip) {
  std::mt19937_64 rng(72);
  const BurnParams p = RandomParams(rng, 3, 2, 5);
  BurnParams q = BurnParams::Zeros(3, 2, 5);
  q.Unflatten(p.Flatten());
  EXPECT_EQ(p, q);
  EXPECT_THROW(q.Unflatten(std::vector<double>(3)), Error);
}

// Tensors for m mentions with k candidates each, every other mention in
// context at distance 1.
FeatureTensors Tensors(std::vector<size_t> k, int d_l, int d_g) {
  std::vector<std::vector<std::pair<size_t, int>>> context(k.size());
  for (size_t i = 0; i < k.size(); ++i) {
    for (size_t o = 0; o < k.size(); ++o) {
      if (o != i) context[i].push_back({o, 1});
    }
  }
  return FeatureTensors::Allocate(d_l, d_g, k, context);
}

// hidden 1 with W1 = 0 and unit residual weights: s_l = phi, s_e = psi.
BurnParams Identity(double gate) {
  BurnParams p = BurnParams::Zeros(1, 1, 1);
  p.w_l3 = {1.0};
  p.w_g3 = {1.0};
  p.gating.values.fill(gate);
  return p;
}

std::vector<double> Softmax(std::vector<double> s) {
  const double m = *std::max_element(s.begin(), s.end());
  double z = 0;
  for (double &x : s) z += (x = std::exp(x - m));
  for (double &x : s) x /= z;
  return s;
}

TEST(InferTest, ZeroParamsGiveUniformBeliefs) {
  std::mt19937_64 rng(73);
  const TrainingExample ex = RandomExample(rng, 4, 3, 4, 4);
  const BeliefState state = Infer(ex.tensors, BurnParams::Zeros(4, 4, 8), {});
  EXPECT_TRUE(state.converged);
  EXPECT_EQ(state.iterations, 1);
  for (const auto &p : state.p) {
    for (double x : p) EXPECT_DOUBLE_EQ(x, 1.0 / p.size());
  }
}

TEST(InferTest, SingleMentionIsLocalSoftmax) {
  FeatureTensors t = Tensors({3}, 1, 1);
  t.MutableUnary(0, 0)[0] = 0.2;
  t.MutableUnary(0, 1)[0] = -1.0;
  t.MutableUnary(0, 2)[0] = 2.0;
  int calls = 0;
  const auto expected = Softmax({0.2, -1.0, 2.0});
  Infer(t, Identity(1.0), {}, [&](int, const auto &p) {
    ++calls;
    for (size_t j = 0; j < 3; ++j) EXPECT_NEAR(p[0][j], expected[j], 1e-15);
  });
  EXPECT_GE(calls, 2);
}

TEST(InferTest, OneStepMatchesHandReference) {
  FeatureTensors t = Tensors({2, 2}, 1, 1);
  const double sl[2][2] = {{0.3, -0.4}, {1.0, 0.5}};
  const double se[2][2][2] = {{{1.0, -2.0}, {0.5, 3.0}}, {{-1.0, 0.25}, {2.0, 0.0}}};
  for (size_t i = 0; i < 2; ++i) {
    for (size_t j = 0; j < 2; ++j) {
      t.MutableUnary(i, j)[0] = sl[i][j];
      for (size_t w = 0; w < 2; ++w) t.MutableBinary(i, 0, j, w)[0] = se[i][j][w];
    }
  }
  InferenceConfig config;
  config.max_iterations = 1;
  const BeliefState state = Infer(t, Identity(1.0), config);

  std::vector<double> p0[2] = {Softmax({sl[0][0], sl[0][1]}), Softmax({sl[1][0], sl[1][1]})};
  for (size_t i = 0; i < 2; ++i) {
    const size_t k = 1 - i;
    std::vector<double> s(2);
    for (size_t j = 0; j < 2; ++j) {
      s[j] = sl[i][j] + se[i][j][0] * p0[k][0] + se[i][j][1] * p0[k][1];
    }
    const auto p1 = Softmax(s);
    EXPECT_NEAR(state.p[i][0], p1[0], 1e-12);
    EXPECT_NEAR(state.p[i][1], p1[1], 1e-12);
  }
  EXPECT_EQ(state.iterations, 1);
}

TEST(InferTest, ZeroGatingDisablesGlobalPath) {
  std::mt19937_64 rng(74);
  for (int trial = 0; trial < 20; ++trial) {
    const TrainingExample ex = RandomExample(rng, 4, 3, 2, 3);
    BurnParams params = RandomParams(rng, 2, 3, 6);
    params.gating.values.fill(0.0);
    std::vector<std::vector<double>> first;
    Infer(ex.tensors, params, {}, [&](int t, const auto &p) {
      if (t == 0) first = p;
      for (size_t i = 0; i < p.size(); ++i) {
        for (size_t j = 0; j < p[i].size(); ++j) EXPECT_NEAR(p[i][j], first[i][j], 1e-15);
      }
    });
  }
}

TEST(InferTest, EmptyCandidateListCarriesPlaceholder) {
  FeatureTensors t = Tensors({2, 0, 3}, 1, 1);
  const BeliefState state = Infer(t, Identity(1.0), {});
  EXPECT_EQ(state.p[1], std::vector<double>{1.0});
  const auto predictions = state.Predictions(t);
  EXPECT_FALSE(predictions[1]);
  EXPECT_EQ(predictions[0], 0u);
}

TEST(InferTest, ContextWindowKeepsNearest) {
  std::vector<std::vector<std::pair<size_t, int>>> context = {{{1, 2}, {2, 9}}, {}, {}};
  FeatureTensors full = FeatureTensors::Allocate(1, 1, {2, 2, 2}, context);
  context[0].pop_back();
  FeatureTensors near = FeatureTensors::Allocate(1, 1, {2, 2, 2}, context);
  std::mt19937_64 rng(75);
  std::uniform_real_distribution<double> u(-2, 2);
  for (double &x : full.unary) x = u(rng);
  for (double &x : full.binary) x = u(rng);
  near.unary = full.unary;
  std::copy_n(full.binary.begin(), near.binary.size(), near.binary.begin());
  InferenceConfig config;
  config.context_window = 1;
  EXPECT_EQ(Infer(full, Identity(0.5), config).p, Infer(near, Identity(0.5), config).p);
}

TEST(InferenceConfigTest, Validate) {
  InferenceConfig config;
  config.Validate();
  config.max_iterations = 0;
  EXPECT_THROW(config.Validate(), Error);
  config.max_iterations = 1;
  config.convergence_tol = 0;
  EXPECT_THROW(config.Validate(), Error);
}

TEST(LossTest, UniformBeliefsGiveLogK) {
  FeatureTensors t = Tensors({5}, 1, 1);
  const TrainingExample ex{t, {2}};
  const LossResult r = LossAndGrad(ex, BurnParams::Zeros(1, 1, 3), {}, nullptr);
  EXPECT_NEAR(r.loss, std::log(5.0), 1e-12);
  EXPECT_EQ(r.counted, 1u);
}

TEST(LossTest, ConfidentCorrectBeliefsGiveZero) {
  FeatureTensors t = Tensors({2, 2}, 1, 1);
  t.MutableUnary(0, 1)[0] = 60;
  t.MutableUnary(1, 0)[0] = 60;
  const TrainingExample ex{t, {1, 0}};
  const LossResult r = LossAndGrad(ex, Identity(0.0), {}, nullptr);
  EXPECT_GE(r.loss, 0.0);
  EXPECT_LT(r.loss, 1e-20);
}

TEST(LossTest, ExcludesUnlearnableMentions) {
  FeatureTensors t = Tensors({2, 2, 2}, 1, 1);
  const TrainingExample ex{t, {0, TrainingExample::kGoldMissing, TrainingExample::kNoGold}};
  const LossResult r = LossAndGrad(ex, Identity(1.0), {}, nullptr);
  EXPECT_EQ(r.counted, 1u);
  EXPECT_EQ(r.excluded, 1u);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-12);
}

TEST(LossTest, FiniteOnRandomInstances) {
  std::mt19937_64 rng(76);
  for (int trial = 0; trial < 100; ++trial) {
    const TrainingExample ex = RandomExample(rng, 5, 4, 4, 4);
    EXPECT_TRUE(std::isfinite(LossAndGrad(ex, RandomParams(rng, 4, 4, 8), {}, nullptr).loss));
  }
}

TEST(GradTest, SymmetricZeroFeaturesGiveZeroGradient) {
  FeatureTensors t = Tensors({3, 3}, 4, 4);
  const TrainingExample ex{t, {0, 2}};
  std::mt19937_64 rng(77);
  BurnParams grad = BurnParams::Zeros(4, 4, 5);
  LossAndGrad(ex, RandomParams(rng, 4, 4, 5), {}, &grad);
  for (double g : grad.Flatten()) EXPECT_EQ(g, 0.0);
}

TEST(GradTest, ZeroGatingWithOneIterationLeavesPairWeightsUntouched) {
  std::mt19937_64 rng(78);
  const TrainingExample ex = RandomExample(rng, 3, 3, 2, 2);
  BurnParams params = RandomParams(rng, 2, 2, 4);
  params.gating.values.fill(0.0);
  InferenceConfig config;
  config.max_iterations = 1;
  BurnParams grad = BurnParams::Zeros(2, 2, 4);
  LossAndGrad(ex, params, config, &grad);
  for (double g : grad.w_g1.data) EXPECT_EQ(g, 0.0);
  for (double g : grad.w_g2) EXPECT_EQ(g, 0.0);
  for (double g : grad.w_g3) EXPECT_EQ(g, 0.0);
}

TEST(GradTest, MatchesFiniteDifferences) {
  const GradCheckResult r = RunGradCheck(7, {});
  EXPECT_EQ(r.instances, 50);
  EXPECT_TRUE(r.passed) << r.max_relative_error;
  EXPECT_LE(r.max_relative_error, 1e-4);
}

TEST(GradTest, GradSumsOverExamples) {
  std::mt19937_64 rng(79);
  std::vector<TrainingExample> examples;
  for (int i = 0; i < 3; ++i) examples.push_back(RandomExample(rng, 3, 3, 2, 2));
  const BurnParams params = RandomParams(rng, 2, 2, 3);
  const InferenceConfig config;
  BurnParams expected = BurnParams::Zeros(2, 2, 3);
  double loss = 0;
  for (const auto &ex : examples) loss += LossAndGrad(ex, params, config, &expected).loss;
  EXPECT_EQ(Grad(examples, params, config), expected);
  EXPECT_EQ(Loss(examples, params, config).loss, loss);
}

TEST(DropoutTest, SeededAndDisabledAtRateZero) {
  std::mt19937_64 rng(80);
  const TrainingExample ex = RandomExample(rng, 3, 3, 2, 2);
  const BurnParams params = RandomParams(rng, 2, 2, 16);
  const InferenceConfig config;
  const double plain = LossAndGrad(ex, params, config, nullptr).loss;
  EXPECT_EQ(LossAndGrad(ex, params, config, nullptr, {0.0, 5}).loss, plain);
  const double a = LossAndGrad(ex, params, config, nullptr, {0.5, 5}).loss;
  const double b = LossAndGrad(ex, params, config, nullptr, {0.5, 5}).loss;
  const double c = LossAndGrad(ex, params, config, nullptr, {0.5, 6}).loss;
  EXPECT_EQ(a, b);
  EXPECT_NE(a, plain);
  EXPECT_NE(a, c);
}

TEST(DropoutTest, GradientMatchesFiniteDifferencesForFixedMask) {
  std::mt19937_64 rng(81);
  const TrainingExample ex = RandomExample(rng, 3, 3, 2, 2);
  const BurnParams params = RandomParams(rng, 2, 2, 4);
  InferenceConfig config;
  config.max_iterations = 2;
  config.convergence_tol = std::numeric_limits<double>::min();
  const DropoutConfig dropout{0.5, 3};
  BurnParams grad = BurnParams::Zeros(2, 2, 4);
  LossAndGrad(ex, params, config, &grad, dropout);
  const auto theta = params.Flatten();
  const auto g = grad.Flatten();
  for (size_t c = 0; c < theta.size(); ++c) {
    BurnParams plus = params, minus = params;
    auto tp = theta, tm = theta;
    tp[c] += 1e-5;
    tm[c] -= 1e-5;
    plus.Unflatten(tp);
    minus.Unflatten(tm);
    const double numeric = (LossAndGrad(ex, plus, config, nullptr, dropout).loss -
                            LossAndGrad(ex, minus, config, nullptr, dropout).loss) /
                           2e-5;
    EXPECT_LE(RelativeError(g[c], numeric), 1e-4) << c;
  }
}

}  // namespace
}  // namespace xel
