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

#ifndef XEL_KB_STATS_H_
#define XEL_KB_STATS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xel/corpus.h"

namespace xel {

struct AnchorLink {
  std::string surface;
  EntityId target;

  friend bool operator==(const AnchorLink &, const AnchorLink &) = default;
};

// One article of an anchor-annotated collection.
struct AnchorPage {
  EntityId page;
  std::vector<AnchorLink> links;

  friend bool operator==(const AnchorPage &, const AnchorPage &) = default;
};

AnchorPage ParseAnchorPageLine(std::string_view line);
std::string FormatAnchorPageLine(const AnchorPage &page);
void ForEachAnchorPage(const std::filesystem::path &path,
                       const std::function<void(const AnchorPage &)> &fn);
std::vector<AnchorPage> ReadAnchorPages(const std::filesystem::path &path);

// Unordered entity pair stored as (smaller, larger).
using EntityPair = std::pair<EntityId, EntityId>;
EntityPair MakeEntityPair(const EntityId &a, const EntityId &b);

struct EntityPairHash {
  size_t operator()(const EntityPair &p) const noexcept {
    const size_t h = std::hash<EntityId>()(p.first);
    return h ^ (std::hash<EntityId>()(p.second) + 0x9e3779b97f4a7c15ULL +
                (h << 6) + (h >> 2));
  }
};

// Knowledge-base statistics gathered from anchor links.
//
//  entity_count[e]     number of anchors targeting e
//  pair_count[{a,b}]   number of pages linking to both a and b (a != b),
//                      once per page
//  outlinks[p][e]      multiplicity of e among the links on page p
//
// epsilon is the log clamp and smoothing the exponent of the smoothed
// unigram distribution used by the PPMI feature.
struct KbStatistics {
  static constexpr double kDefaultEpsilon = 1e-7;
  static constexpr double kDefaultSmoothing = 0.75;

  double epsilon = kDefaultEpsilon;
  double smoothing = kDefaultSmoothing;
  std::unordered_map<EntityId, int64_t> entity_count;
  std::unordered_map<EntityPair, int64_t, EntityPairHash> pair_count;
  std::unordered_map<EntityId, std::unordered_map<EntityId, int64_t>> outlinks;
  int64_t total_anchor_count = 0;
  int64_t total_pair_count = 0;

  void AddPage(const AnchorPage &page);

  int64_t EntityCount(const EntityId &e) const;
  int64_t PairCount(const EntityId &a, const EntityId &b) const;
  int64_t OutlinkCount(const EntityId &page, const EntityId &target) const;

  // Throws Error if a total or cross-map invariant does not hold.
  void CheckInvariants() const;

  friend bool operator==(const KbStatistics &, const KbStatistics &) = default;
};

KbStatistics Ingest(std::span<const AnchorPage> pages,
                    double epsilon = KbStatistics::kDefaultEpsilon,
                    double smoothing = KbStatistics::kDefaultSmoothing);

// Pointwise sum. Throws if the two stores use different constants.
KbStatistics Merge(const KbStatistics &a, const KbStatistics &b);

// Store directory: meta.json plus three sorted TSV files. Load verifies
// the format version and per-file CRC-32 checksums.
void SaveStats(const KbStatistics &stats, const std::filesystem::path &dir);
KbStatistics LoadStats(const std::filesystem::path &dir);

// Source-language entity -> English entity.
using BilingualMap = std::unordered_map<EntityId, EntityId>;

// TSV "source\tenglish". A source mapped to two different targets is an
// error; exact duplicate lines are tolerated.
BilingualMap ReadBilingualMap(const std::filesystem::path &path);

}  // namespace xel

#endif  // XEL_KB_STATS_H_
