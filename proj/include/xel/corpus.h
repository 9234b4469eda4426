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

#ifndef XEL_CORPUS_H_
#define XEL_CORPUS_H_

#include <compare>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xel {

// Canonical English-KB entity title. The stored form has whitespace runs
// collapsed; case is preserved and equality is byte-wise.
class EntityId {
 public:
  // Throws Error if the title is empty after normalization.
  explicit EntityId(std::string_view title);

  const std::string &str() const { return title_; }

  friend bool operator==(const EntityId &, const EntityId &) = default;
  friend std::strong_ordering operator<=>(const EntityId &,
                                          const EntityId &) = default;

 private:
  std::string title_;
};

std::ostream &operator<<(std::ostream &os, const EntityId &id);

struct Candidate {
  EntityId entity;
  double p = 0.0;

  friend bool operator==(const Candidate &, const Candidate &) = default;
};

struct Mention {
  std::string id;
  int start = 0;  // first token
  int end = 0;    // one past the last token
  std::string surface;
  std::optional<EntityId> gold;
  std::vector<Candidate> candidates;

  // Position of the gold entity in the candidate list, if both exist.
  std::optional<size_t> GoldIndex() const;

  friend bool operator==(const Mention &, const Mention &) = default;
};

struct Document {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<Mention> mentions;

  // Checks span bounds, unique mention ids, unique candidate entities and
  // candidate probabilities in [0,1]. Throws Error naming the offender.
  void Validate() const;

  // Orders mentions by (start, end, id).
  void SortMentions();

  friend bool operator==(const Document &, const Document &) = default;
};

// Number of tokens strictly between two spans; 0 when they touch or overlap.
int TokenDistance(const Mention &a, const Mention &b);

// (doc_id, mention_id)
using MentionKey = std::pair<std::string, std::string>;

// Absent keys mean "no prediction".
using Predictions = std::map<MentionKey, EntityId>;

// Single-line JSON forms of the corpus format. ParseDocumentLine validates
// and sorts the mentions.
Document ParseDocumentLine(std::string_view line);
std::string FormatDocumentLine(const Document &doc);

std::vector<Document> ReadCorpus(const std::filesystem::path &path);
void WriteCorpus(std::span<const Document> docs,
                 const std::filesystem::path &path);

// Writes one predictions line per document, every mention present, with
// null for mentions lacking a prediction. Throws if a prediction key does
// not name a mention in docs.
void WriteLinked(std::span<const Document> docs,
                 const Predictions &predictions, std::ostream &out);
void WriteLinked(std::span<const Document> docs,
                 const Predictions &predictions,
                 const std::filesystem::path &path);

Predictions ReadPredictions(const std::filesystem::path &path);

// Calls fn(line_number, line) for every non-blank line of a text file.
void ForEachLine(const std::filesystem::path &path,
                 const std::function<void(size_t, std::string_view)> &fn);

}  // namespace xel

template <>
struct std::hash<xel::EntityId> {
  size_t operator()(const xel::EntityId &id) const noexcept {
    return std::hash<std::string>()(id.str());
  }
};

#endif  // XEL_CORPUS_H_
