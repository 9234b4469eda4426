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

#include "xel/eval.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "synthetic.h"
#include "xel/error.h"

namespace xel {
namespace {

// One document with four gold mentions; the first two list their gold
// entity, and a fifth mention is unlabeled.
std::vector<Document> Corpus() {
  Document doc;
  doc.id = "d";
  doc.tokens.assign(5, "w");
  auto add = [&](const std::string &id, int pos, std::optional<std::string> gold,
                 std::vector<std::string> candidates) {
    Mention m{.id = id, .start = pos, .end = pos + 1, .surface = "s"};
    if (gold) m.gold = EntityId(*gold);
    for (const auto &c : candidates) m.candidates.push_back({EntityId(c), 0.5});
    doc.mentions.push_back(m);
  };
  add("a", 0, "A", {"A", "X"});
  add("b", 1, "B", {"Y", "B"});
  add("c", 2, "C", {"X"});
  add("d", 3, "D", {});
  add("e", 4, std::nullopt, {"X"});
  return {doc};
}

TEST(GoldRecallTest, HandCount) {
  EXPECT_DOUBLE_EQ(GoldCandidateRecall(Corpus()), 0.5);
}

TEST(GoldRecallTest, AllCovered) {
  auto docs = Corpus();
  docs[0].mentions.resize(2);
  EXPECT_DOUBLE_EQ(GoldCandidateRecall(docs), 1.0);
}

TEST(GoldRecallTest, InKbFilter) {
  const KbMembership in_kb = [](const EntityId &e) { return e.str() != "D"; };
  EXPECT_DOUBLE_EQ(GoldCandidateRecall(Corpus(), in_kb), 2.0 / 3.0);
}

TEST(GoldRecallTest, NoEvaluableMentions) {
  auto docs = Corpus();
  for (Mention &m : docs[0].mentions) m.gold.reset();
  EXPECT_THROW(GoldCandidateRecall(docs), Error);
  EXPECT_THROW(Accuracy(docs, {}), Error);
}

TEST(AccuracyTest, HandCounts) {
  const auto docs = Corpus();
  Predictions all;
  for (const Mention &m : docs[0].mentions) {
    if (m.gold) all.insert({{"d", m.id}, *m.gold});
  }
  EXPECT_DOUBLE_EQ(Accuracy(docs, all), 1.0);
  Predictions three = all;
  three.erase({"d", "d"});  // null prediction counts as incorrect
  EXPECT_DOUBLE_EQ(Accuracy(docs, three), 0.75);
}

TEST(EvaluateTest, AccuracyBoundedByRecallForCandidatePredictions) {
  const auto docs = Corpus();
  const Predictions p = {{{"d", "a"}, EntityId("A")}, {{"d", "b"}, EntityId("B")},
                         {{"d", "c"}, EntityId("X")}};
  const EvalReport r = Evaluate(docs, p);
  EXPECT_TRUE(r.predictions_from_candidates);
  EXPECT_EQ(r.n_mentions, 5u);
  EXPECT_EQ(r.n_in_kb, 4u);
  EXPECT_EQ(r.covered, 2u);
  EXPECT_EQ(r.correct, 2u);
  EXPECT_LE(r.accuracy, r.gold_recall);
  ASSERT_EQ(r.per_document.size(), 1u);
  EXPECT_EQ(r.per_document[0].correct, 2u);
}

TEST(EvaluateTest, OffListPredictionsAreFlagged) {
  const auto docs = Corpus();
  const EvalReport r = Evaluate(docs, {{{"d", "d"}, EntityId("D")}});
  EXPECT_FALSE(r.predictions_from_candidates);
  EXPECT_EQ(r.correct, 1u);
}

TEST(EvaluateTest, PermutationAndJobsInvariant) {
  const auto world = testing::MakeCoherenceWorld(111, {.topics = 5, .documents = 25});
  std::mt19937_64 rng(111);
  Predictions p;
  for (const Document &doc : world.docs) {
    for (const Mention &m : doc.mentions) {
      p.insert({{doc.id, m.id}, m.candidates[rng() % m.candidates.size()].entity});
    }
  }
  const EvalReport base = Evaluate(world.docs, p);
  auto shuffled = world.docs;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const EvalReport other = Evaluate(shuffled, p, {}, 4);
  EXPECT_EQ(base.accuracy, other.accuracy);
  EXPECT_EQ(base.gold_recall, other.gold_recall);
  EXPECT_EQ(base.correct, other.correct);
  const EvalReport threaded = Evaluate(world.docs, p, {}, 4);
  ASSERT_EQ(threaded.per_document.size(), base.per_document.size());
  for (size_t i = 0; i < base.per_document.size(); ++i) {
    EXPECT_EQ(threaded.per_document[i].doc_id, base.per_document[i].doc_id);
    EXPECT_EQ(threaded.per_document[i].correct, base.per_document[i].correct);
  }
}

}  // namespace
}  // namespace xel
