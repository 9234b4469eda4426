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

#include "xel/candgen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "json.hpp"
#include "xel/error.h"
#include "xel/text.h"

namespace xel {

using json = nlohmann::json;

namespace {

// Orders candidates by probability, descending, then entity id.
bool ByScoreThenId(const Candidate &a, const Candidate &b) {
  if (a.p != b.p) return a.p > b.p;
  return a.entity < b.entity;
}

// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace

void MentionEntityMap::Add(std::string_view surface, const EntityId &entity,
                           int64_t count) {
  if (count <= 0) throw Error("dictionary counts must be positive");
  std::string key = NormalizeSurface(surface);
  if (key.empty()) throw Error("empty surface");
  table_[std::move(key)][entity] += count;
}

std::vector<Candidate> MentionEntityMap::Lookup(std::string_view surface,
                                                int k) const {
  if (k < 1) throw Error("K must be at least 1");
  auto it = table_.find(NormalizeSurface(surface));
  if (it == table_.end()) return {};
  int64_t total = 0;
  for (const auto &[entity, count] : it->second) total += count;
  std::vector<Candidate> result;
  result.reserve(it->second.size());
  for (const auto &[entity, count] : it->second) {
    result.push_back({entity, static_cast<double>(count) / total});
  }
  std::sort(result.begin(), result.end(), ByScoreThenId);
  if (result.size() > static_cast<size_t>(k)) result.erase(result.begin() + k, result.end());
  return result;
}

double MentionEntityMap::Prior(std::string_view surface,
                               const EntityId &entity) const {
  auto it = table_.find(NormalizeSurface(surface));
  if (it == table_.end()) return 0.0;
  int64_t total = 0;
  for (const auto &[e, count] : it->second) total += count;
  auto jt = it->second.find(entity);
  return jt == it->second.end() ? 0.0
                                : static_cast<double>(jt->second) / total;
}

bool MentionEntityMap::ContainsEntity(const EntityId &entity) const {
  for (const auto &[surface, entities] : table_) {
    if (entities.contains(entity)) return true;
  }
  return false;
}

void MentionEntityMap::Save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto &[surface, entities] : table_) {
    for (const auto &[entity, count] : entities) {
      out << surface << '\t' << entity.str() << '\t' << count << '\n';
    }
  }
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

MentionEntityMap MentionEntityMap::Load(const std::filesystem::path &path) {
  MentionEntityMap map;
  ForEachLine(path, [&](size_t line_number, std::string_view line) {
    const std::string where = path.string() + ":" + std::to_string(line_number);
    const size_t first = line.find('\t');
    const size_t second =
        first == std::string_view::npos ? first : line.find('\t', first + 1);
    if (second == std::string_view::npos ||
        line.find('\t', second + 1) != std::string_view::npos) {
      throw Error(where + ": expected surface, entity and count");
    }
    const std::string count_text(line.substr(second + 1));
    size_t used = 0;
    int64_t count = 0;
    try {
      count = std::stoll(count_text, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != count_text.size() || count <= 0) {
      throw Error(where + ": bad count '" + count_text + "'");
    }
    map.Add(line.substr(0, first),
            EntityId(line.substr(first + 1, second - first - 1)), count);
  });
  return map;
}

void WikiMentionBuilder::AddPage(const AnchorPage &page,
                                 const BilingualMap &bimap) {
  for (const AnchorLink &link : page.links) {
    auto it = bimap.find(link.target);
    if (it == bimap.end()) {
      ++dropped;
      continue;
    }
    map.Add(link.surface, it->second);
    ++kept;
  }
}

WikiMentionBuilder BuildWikiMention(std::span<const AnchorPage> pages,
                                    const BilingualMap &bimap) {
  WikiMentionBuilder builder;
  for (const AnchorPage &page : pages) builder.AddPage(page, bimap);
  return builder;
}

std::vector<Candidate> Calibrate(std::span<const ScoredCandidate> scores,
                                 double gamma) {
  if (scores.empty()) throw Error("cannot calibrate an empty candidate list");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error("calibration gamma must be positive");
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  for (const ScoredCandidate &c : scores) {
    if (!std::isfinite(c.score)) {
      throw Error("non-finite score for candidate '" + c.entity.str() + "'");
    }
    max_logit = std::max(max_logit, gamma * c.score);
  }
  std::vector<double> weights(scores.size());
  CompensatedSum total;
  for (size_t j = 0; j < scores.size(); ++j) {
    weights[j] = std::exp(gamma * scores[j].score - max_logit);
    total.Add(weights[j]);
  }
  std::vector<Candidate> result;
  result.reserve(scores.size());
  for (size_t j = 0; j < scores.size(); ++j) {
    result.push_back({scores[j].entity, weights[j] / total.value()});
  }
  return result;
}

std::vector<Candidate> Combine(std::span<const std::vector<Candidate>> lists,
                               int k) {
  if (lists.empty()) throw Error("combine needs at least one source");
  if (k < 1) throw Error("K must be at least 1");
  std::unordered_map<EntityId, double> sums;
  std::vector<EntityId> order;
  for (const auto &list : lists) {
    for (const Candidate &c : list) {
      if (!(c.p >= 0.0 && c.p <= 1.0)) {
        throw Error("candidate probability out of [0,1]");
      }
      auto [it, inserted] = sums.emplace(c.entity, 0.0);
      if (inserted) order.push_back(c.entity);
      it->second += c.p;
    }
  }
  std::vector<Candidate> fused;
  fused.reserve(order.size());
  const double n = static_cast<double>(lists.size());
  for (const EntityId &e : order) fused.push_back({e, sums.at(e) / n});
  std::sort(fused.begin(), fused.end(), ByScoreThenId);
  if (fused.size() > static_cast<size_t>(k)) fused.erase(fused.begin() + k, fused.end());
  return fused;
}

ExternalScores ReadExternalScores(const std::filesystem::path &path) {
  ExternalScores scores;
  ForEachLine(path, [&](size_t line_number, std::string_view line) {
    const std::string where = path.string() + ":" + std::to_string(line_number);
    try {
      const json j = json::parse(line);
      ExternalCandidates entry;
      entry.probabilistic = j.value("probabilistic", false);
      for (const json &c : j.at("candidates")) {
        entry.candidates.push_back(
            {EntityId(c.at("entity").get<std::string>()),
             c.at("score").get<double>()});
      }
      scores[{j.at("doc_id").get<std::string>(),
              j.at("mention_id").get<std::string>()}] = std::move(entry);
    } catch (const json::exception &e) {
      throw Error(where + ": malformed JSON: " + e.what());
    } catch (const Error &e) {
      throw Error(where + ": " + e.what());
    }
  });
  return scores;
}

void GenerateCandidates(std::span<Document> docs,
                        const MentionEntityMap *dictionary,
                        std::span<const ExternalScores> external,
                        const CandidateConfig &config) {
  if (dictionary == nullptr && external.empty()) {
    throw Error("no candidate source given");
  }
  for (Document &doc : docs) {
    for (Mention &mention : doc.mentions) {
      std::vector<std::vector<Candidate>> sources;
      if (dictionary != nullptr) {
        sources.push_back(dictionary->Lookup(mention.surface, config.k));
      }
      for (const ExternalScores &source : external) {
        auto it = source.find({doc.id, mention.id});
        if (it == source.end() || it->second.candidates.empty()) {
          sources.emplace_back();
          continue;
        }
        const ExternalCandidates &entry = it->second;
        if (entry.probabilistic) {
          std::vector<Candidate> list;
          for (const ScoredCandidate &c : entry.candidates) {
            list.push_back({c.entity, c.score});
          }
          sources.push_back(std::move(list));
        } else {
          sources.push_back(Calibrate(entry.candidates, config.gamma));
        }
      }
      mention.candidates = Combine(sources, config.k);
    }
    doc.Validate();
  }
}

}  // namespace xel
