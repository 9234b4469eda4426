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

#include "xel/corpus.h"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_util.h"
#include "xel/error.h"

namespace xel {
namespace {

using ::xel::testing::ReadFile;
using ::xel::testing::TempDir;
using ::xel::testing::WriteFile;

std::string ErrorOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.what();
  }
  return "";
}

TEST(EntityIdTest, CollapsesWhitespacePreservingCase) {
  EXPECT_EQ(EntityId("  New   York ").str(), "New York");
  EXPECT_NE(EntityId("Paris"), EntityId("paris"));
  EXPECT_EQ(EntityId("a b"), EntityId("a\t b"));
  EXPECT_THROW(EntityId(" \n"), Error);
}

TEST(TokenDistanceTest, CountsTokensBetweenSpans) {
  Mention a{.id = "a", .start = 0, .end = 2};
  Mention b{.id = "b", .start = 5, .end = 6};
  Mention c{.id = "c", .start = 1, .end = 3};
  EXPECT_EQ(TokenDistance(a, b), 3);
  EXPECT_EQ(TokenDistance(b, a), 3);
  EXPECT_EQ(TokenDistance(a, c), 0);
  Mention d{.id = "d", .start = 2, .end = 3};
  EXPECT_EQ(TokenDistance(a, d), 0);
}

TEST(ReadCorpusTest, MinimalDocument) {
  TempDir dir;
  WriteFile(dir / "c.jsonl",
            R"({"doc_id":"d1","tokens":["a","b","c"],"mentions":[)"
            R"({"id":"m1","start":0,"end":1,"surface":"a","gold":"A"}]})"
            "\n");
  const auto docs = ReadCorpus(dir / "c.jsonl");
  ASSERT_EQ(docs.size(), 1u);
  ASSERT_EQ(docs[0].mentions.size(), 1u);
  EXPECT_EQ(docs[0].mentions[0].gold, EntityId("A"));
  EXPECT_TRUE(docs[0].mentions[0].candidates.empty());
}

TEST(ReadCorpusTest, EmptyFileGivesNoDocuments) {
  TempDir dir;
  WriteFile(dir / "c.jsonl", "");
  EXPECT_TRUE(ReadCorpus(dir / "c.jsonl").empty());
}

TEST(ReadCorpusTest, OutOfBoundsSpanNamesTheMention) {
  TempDir dir;
  WriteFile(dir / "c.jsonl",
            R"({"doc_id":"d1","tokens":["a","b","c"],"mentions":[)"
            R"({"id":"m7","start":5,"end":6,"surface":"x","gold":null}]})");
  const std::string message = ErrorOf([&] { ReadCorpus(dir / "c.jsonl"); });
  EXPECT_NE(message.find("d1"), std::string::npos) << message;
  EXPECT_NE(message.find("m7"), std::string::npos) << message;
  EXPECT_NE(message.find(":1:"), std::string::npos) << message;
}

TEST(ReadCorpusTest, MalformedLineCarriesLineNumber) {
  TempDir dir;
  WriteFile(dir / "c.jsonl",
            R"({"doc_id":"d1","tokens":[],"mentions":[]})"
            "\n{not json\n");
  const std::string message = ErrorOf([&] { ReadCorpus(dir / "c.jsonl"); });
  EXPECT_NE(message.find(":2:"), std::string::npos) << message;
}

TEST(ReadCorpusTest, RejectsDuplicateCandidatesAndBadProbabilities) {
  EXPECT_THROW(ParseDocumentLine(
                   R"({"doc_id":"d","tokens":["a"],"mentions":[{"id":"m","start":0,)"
                   R"("end":1,"surface":"a","gold":null,"candidates":[)"
                   R"({"entity":"A","p":0.5},{"entity":"A","p":0.5}]}]})"),
               Error);
  EXPECT_THROW(ParseDocumentLine(
                   R"({"doc_id":"d","tokens":["a"],"mentions":[{"id":"m","start":0,)"
                   R"("end":1,"surface":"a","gold":null,"candidates":[)"
                   R"({"entity":"A","p":1.5}]}]})"),
               Error);
}

TEST(ReadCorpusTest, SortsMentionsByStartThenEnd) {
  const Document doc = ParseDocumentLine(
      R"({"doc_id":"d","tokens":["a","b","c","d"],"mentions":[)"
      R"({"id":"x","start":2,"end":3,"surface":"c","gold":null},)"
      R"({"id":"y","start":0,"end":2,"surface":"ab","gold":null},)"
      R"({"id":"z","start":0,"end":1,"surface":"a","gold":null}]})");
  ASSERT_EQ(doc.mentions.size(), 3u);
  EXPECT_EQ(doc.mentions[0].id, "z");
  EXPECT_EQ(doc.mentions[1].id, "y");
  EXPECT_EQ(doc.mentions[2].id, "x");
}

Document RandomDocument(std::mt19937_64 &rng, int index) {
  Document doc;
  doc.id = "doc" + std::to_string(index);
  const int tokens = 1 + rng() % 12;
  for (int t = 0; t < tokens; ++t) doc.tokens.push_back("tök" + std::to_string(t));
  const int mentions = rng() % 4;
  for (int i = 0; i < mentions; ++i) {
    Mention m;
    m.id = "m" + std::to_string(i);
    m.start = rng() % tokens;
    m.end = m.start + 1 + rng() % (tokens - m.start);
    m.surface = "surface " + std::to_string(i);
    if (rng() % 3) m.gold = EntityId("E" + std::to_string(rng() % 5));
    const int k = rng() % 4;
    for (int j = 0; j < k; ++j) {
      m.candidates.push_back({EntityId("C" + std::to_string(j)),
                              static_cast<double>(rng() % 1000) / 999.0});
    }
    doc.mentions.push_back(m);
  }
  doc.SortMentions();
  return doc;
}

TEST(CorpusRoundTripTest, WriteThenReadIsIdentity) {
  std::mt19937_64 rng(3);
  TempDir dir;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Document> docs;
    for (int d = 0; d < 5; ++d) docs.push_back(RandomDocument(rng, d));
    WriteCorpus(docs, dir / "c.jsonl");
    EXPECT_EQ(ReadCorpus(dir / "c.jsonl"), docs);
  }
}

TEST(CorpusRoundTripTest, MentionOrderIndependentOfInputOrder) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    Document doc = RandomDocument(rng, trial);
    Document shuffled = doc;
    std::shuffle(shuffled.mentions.begin(), shuffled.mentions.end(), rng);
    EXPECT_EQ(ParseDocumentLine(FormatDocumentLine(shuffled)), doc);
  }
}

std::vector<Document> TwoDocs() {
  return {ParseDocumentLine(
              R"({"doc_id":"d1","tokens":["a","b"],"mentions":[)"
              R"({"id":"m1","start":0,"end":1,"surface":"a","gold":"A"},)"
              R"({"id":"m2","start":1,"end":2,"surface":"b","gold":"B"}]})"),
          ParseDocumentLine(
              R"({"doc_id":"d2","tokens":["c"],"mentions":[)"
              R"({"id":"m1","start":0,"end":1,"surface":"c","gold":null}]})")};
}

TEST(WriteLinkedTest, EmptyPredictionsGiveNulls) {
  std::ostringstream out;
  WriteLinked(TwoDocs(), {}, out);
  EXPECT_EQ(out.str(),
            R"({"doc_id":"d1","mentions":[{"id":"m1","prediction":null},)"
            R"({"id":"m2","prediction":null}]})"
            "\n"
            R"({"doc_id":"d2","mentions":[{"id":"m1","prediction":null}]})"
            "\n");
}

TEST(WriteLinkedTest, RoundTripsPredictions) {
  TempDir dir;
  const Predictions predictions = {{{"d1", "m2"}, EntityId("B")},
                                   {{"d2", "m1"}, EntityId("Zürich")}};
  WriteLinked(TwoDocs(), predictions, dir / "p.jsonl");
  const std::string text = ReadFile(dir / "p.jsonl");
  size_t non_null = 0;
  for (size_t pos = 0; (pos = text.find("\"prediction\":\"", pos)) != std::string::npos;
       ++pos) {
    ++non_null;
  }
  EXPECT_EQ(non_null, 2u);
  EXPECT_EQ(ReadPredictions(dir / "p.jsonl"), predictions);
}

TEST(WriteLinkedTest, UnknownKeyIsAnError) {
  std::ostringstream out;
  EXPECT_THROW(WriteLinked(TwoDocs(), {{{"d1", "nope"}, EntityId("A")}}, out),
               Error);
  EXPECT_THROW(WriteLinked(TwoDocs(), {{{"d9", "m1"}, EntityId("A")}}, out),
               Error);
}

TEST(DocumentTest, GoldIndex) {
  Mention m;
  m.gold = EntityId("B");
  m.candidates = {{EntityId("A"), 0.5}, {EntityId("B"), 0.5}};
  EXPECT_EQ(m.GoldIndex(), 1u);
  m.gold = EntityId("C");
  EXPECT_FALSE(m.GoldIndex());
  m.gold.reset();
  EXPECT_FALSE(m.GoldIndex());
}

}  // namespace
}  // namespace xel
