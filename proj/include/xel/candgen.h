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

#ifndef XEL_CANDGEN_H_
#define XEL_CANDGEN_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xel/corpus.h"
#include "xel/kb_stats.h"

namespace xel {

// Surface -> entity count table. Surfaces are stored in NormalizeSurface
// form; the prior p(e|m) of an entry is its count over the surface total.
class MentionEntityMap {
 public:
  void Add(std::string_view surface, const EntityId &entity, int64_t count = 1);

  // Top-k entities for the surface by prior, descending, ties by entity id.
  // The returned probabilities are the untruncated priors. Unknown
  // surfaces yield an empty list.
  std::vector<Candidate> Lookup(std::string_view surface, int k) const;

  double Prior(std::string_view surface, const EntityId &entity) const;
  bool ContainsEntity(const EntityId &entity) const;
  size_t size() const { return table_.size(); }

  const std::map<std::string, std::map<EntityId, int64_t>> &table() const {
    return table_;
  }

  // Dictionary TSV "surface\tentity\tcount", sorted by surface then entity.
  void Save(const std::filesystem::path &path) const;
  static MentionEntityMap Load(const std::filesystem::path &path);

  friend bool operator==(const MentionEntityMap &,
                         const MentionEntityMap &) = default;

 private:
  std::map<std::string, std::map<EntityId, int64_t>> table_;
};

struct WikiMentionBuilder {
  MentionEntityMap map;
  int64_t kept = 0;
  int64_t dropped = 0;  // anchors whose entity has no English counterpart

  void AddPage(const AnchorPage &page, const BilingualMap &bimap);
};

WikiMentionBuilder BuildWikiMention(std::span<const AnchorPage> pages,
                                    const BilingualMap &bimap);

struct ScoredCandidate {
  EntityId entity;
  double score = 0.0;
};

// Temperature softmax exp(gamma*s_j) / sum_k exp(gamma*s_k), in input
// order. Throws on an empty list, a non-finite score or gamma <= 0.
std::vector<Candidate> Calibrate(std::span<const ScoredCandidate> scores,
                                 double gamma);

// Averages calibrated lists over all sources, a source that lacks an entity
// contributing 0, and keeps the top k (ties by entity id).
std::vector<Candidate> Combine(std::span<const std::vector<Candidate>> lists,
                               int k);

struct ExternalCandidates {
  std::vector<ScoredCandidate> candidates;
  bool probabilistic = false;
};

using ExternalScores = std::map<MentionKey, ExternalCandidates>;

ExternalScores ReadExternalScores(const std::filesystem::path &path);

struct CandidateConfig {
  int k = 30;
  double gamma = 1.0;
};

// Replaces every mention's candidate list by the fusion of the dictionary
// lookup (when a dictionary is given) and each external source that scores
// the mention. Non-probabilistic external lists are calibrated first.
void GenerateCandidates(std::span<Document> docs,
                        const MentionEntityMap *dictionary,
                        std::span<const ExternalScores> external,
                        const CandidateConfig &config);

}  // namespace xel

#endif  // XEL_CANDGEN_H_
