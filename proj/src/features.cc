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

#include "xel/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "xel/error.h"

namespace xel {

int UnaryDim(FeatureSet set) { return set == FeatureSet::kBase ? 1 : 4; }
int BinaryDim(FeatureSet set) { return set == FeatureSet::kBase ? 1 : 4; }

std::string_view FeatureSetName(FeatureSet set) {
  return set == FeatureSet::kBase ? "BASE" : "FEAT";
}

FeatureSet ParseFeatureSet(std::string_view name) {
  if (name == "BASE") return FeatureSet::kBase;
  if (name == "FEAT") return FeatureSet::kFeat;
  throw Error("unknown feature set '" + std::string(name) + "'");
}

EmbeddingStore::EmbeddingStore(int dim) : dim_(dim) {
  if (dim < 1) throw Error("embedding dimension must be positive");
}

void EmbeddingStore::Add(const EntityId &entity, std::vector<double> vector) {
  if (static_cast<int>(vector.size()) != dim_) {
    throw Error("embedding for '" + entity.str() + "' has " +
                std::to_string(vector.size()) + " values, expected " +
                std::to_string(dim_));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) {
      throw Error("non-finite embedding value for '" + entity.str() + "'");
    }
  }
  vectors_.insert_or_assign(entity, std::move(vector));
}

const std::vector<double> *EmbeddingStore::Find(const EntityId &entity) const {
  auto it = vectors_.find(entity);
  return it == vectors_.end() ? nullptr : &it->second;
}

double EmbeddingStore::Cosine(const EntityId &a, const EntityId &b) const {
  const std::vector<double> *va = Find(a);
  const std::vector<double> *vb = Find(b);
  if (va == nullptr || vb == nullptr) return 0.0;
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (int d = 0; d < dim_; ++d) {
    dot += (*va)[d] * (*vb)[d];
    norm_a += (*va)[d] * (*va)[d];
    norm_b += (*vb)[d] * (*vb)[d];
  }
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), -1.0, 1.0);
}

EmbeddingStore EmbeddingStore::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  long long expected = 0;
  int dim = 0;
  if (!std::getline(in, line) ||
      !(std::istringstream(line) >> expected >> dim) || expected < 0) {
    throw Error(path.string() + ": missing \"N dim\" header");
  }
  EmbeddingStore store(dim);
  size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_number);
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) throw Error(where + ": missing tab");
    std::istringstream values(line.substr(tab + 1));
    std::vector<double> vector;
    double v;
    while (values >> v) vector.push_back(v);
    if (!values.eof()) throw Error(where + ": bad number");
    try {
      store.Add(EntityId(std::string_view(line).substr(0, tab)),
                std::move(vector));
    } catch (const Error &e) {
      throw Error(where + ": " + e.what());
    }
  }
  if (static_cast<long long>(store.size()) != expected) {
    throw Error(path.string() + ": header announces " +
                std::to_string(expected) + " vectors, found " +
                std::to_string(store.size()));
  }
  return store;
}

void EmbeddingStore::Save(const std::filesystem::path &path) const {
  std::vector<const std::pair<const EntityId, std::vector<double>> *> rows;
  for (const auto &row : vectors_) rows.push_back(&row);
  std::sort(rows.begin(), rows.end(),
            [](auto *a, auto *b) { return a->first < b->first; });
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << rows.size() << ' ' << dim_ << '\n';
  for (const auto *row : rows) {
    out << row->first.str() << '\t';
    for (int d = 0; d < dim_; ++d) out << (d ? " " : "") << row->second[d];
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

FeatureExtractor::FeatureExtractor(const KbStatistics &stats,
                                   const EmbeddingStore *embeddings,
                                   FeatureSet set)
    : stats_(stats), embeddings_(embeddings), set_(set) {
  // Summed in sorted order so the normalizer is bit-reproducible.
  std::vector<std::pair<std::string_view, int64_t>> counts;
  for (const auto &[e, count] : stats.entity_count) counts.emplace_back(e.str(), count);
  std::sort(counts.begin(), counts.end());
  for (const auto &[e, count] : counts) {
    smoothed_total_ += std::pow(static_cast<double>(count), stats.smoothing);
  }
  for (const auto &[page, targets] : stats.outlinks) {
    int64_t total = 0;
    for (const auto &[target, count] : targets) total += count;
    outlink_totals_[page] = total;
  }
}

double FeatureExtractor::ClampedLog(double ratio) const {
  return std::log(std::max(ratio, stats_.epsilon));
}

std::vector<double> FeatureExtractor::Unary(const Document &doc,
                                            size_t mention,
                                            size_t candidate) const {
  const Candidate &c = doc.mentions[mention].candidates[candidate];
  std::vector<double> phi;
  phi.reserve(UnaryDim(set_));
  phi.push_back(ClampedLog(c.p));
  if (set_ == FeatureSet::kBase) return phi;

  const double total = static_cast<double>(stats_.total_anchor_count);
  phi.push_back(total > 0 ? ClampedLog(stats_.EntityCount(c.entity) / total)
                          : std::log(stats_.epsilon));

  int related = 0;
  int exact = 0;
  for (size_t k = 0; k < doc.mentions.size(); ++k) {
    if (k == mention) continue;
    bool co_occurs = false;
    bool contains = false;
    for (const Candidate &other : doc.mentions[k].candidates) {
      co_occurs = co_occurs || stats_.PairCount(c.entity, other.entity) > 0;
      contains = contains || other.entity == c.entity;
    }
    related += co_occurs;
    exact += contains;
  }
  phi.push_back(related);
  phi.push_back(exact);
  return phi;
}

std::vector<double> FeatureExtractor::Binary(const EntityId &a,
                                             const EntityId &b) const {
  std::vector<double> psi;
  psi.reserve(BinaryDim(set_));
  const int64_t count_a = stats_.EntityCount(a);
  const int64_t pair = stats_.PairCount(a, b);
  psi.push_back(count_a > 0 ? ClampedLog(static_cast<double>(pair) / count_a)
                            : std::log(stats_.epsilon));
  if (set_ == FeatureSet::kBase) return psi;

  double ppmi = 0.0;
  const int64_t count_b = stats_.EntityCount(b);
  if (pair > 0 && count_a > 0 && count_b > 0 && smoothed_total_ > 0) {
    const double joint =
        static_cast<double>(pair) / static_cast<double>(stats_.total_pair_count);
    const double marginal_a =
        std::pow(static_cast<double>(count_a), stats_.smoothing) / smoothed_total_;
    const double marginal_b =
        std::pow(static_cast<double>(count_b), stats_.smoothing) / smoothed_total_;
    ppmi = std::max(std::log2(joint / (marginal_a * marginal_b)), 0.0);
  }
  psi.push_back(ppmi);

  psi.push_back(embeddings_ != nullptr ? embeddings_->Cosine(a, b) : 0.0);

  auto it = outlink_totals_.find(a);
  const int64_t links = it == outlink_totals_.end() ? 0 : it->second;
  psi.push_back(links > 0 ? ClampedLog(static_cast<double>(
                                           stats_.OutlinkCount(a, b)) /
                                       links)
                          : std::log(stats_.epsilon));
  return psi;
}

FeatureTensors FeatureTensors::Allocate(
    int unary_dim, int binary_dim, std::vector<size_t> num_candidates,
    const std::vector<std::vector<std::pair<size_t, int>>> &context) {
  if (context.size() != num_candidates.size()) {
    throw Error("context lists do not match the mention count");
  }
  FeatureTensors t;
  t.unary_dim = unary_dim;
  t.binary_dim = binary_dim;
  t.num_candidates = std::move(num_candidates);
  size_t unary_size = 0;
  for (size_t k : t.num_candidates) {
    t.unary_offset.push_back(unary_size);
    unary_size += k * unary_dim;
  }
  t.unary.assign(unary_size, 0.0);
  size_t binary_size = 0;
  t.context.resize(context.size());
  for (size_t i = 0; i < context.size(); ++i) {
    for (const auto &[k, distance] : context[i]) {
      if (k >= t.num_candidates.size() || k == i) {
        throw Error("invalid context mention");
      }
      t.context[i].push_back({k, distance, binary_size});
      binary_size += t.num_candidates[i] * t.num_candidates[k] * binary_dim;
    }
  }
  t.binary.assign(binary_size, 0.0);
  return t;
}

std::vector<std::pair<size_t, int>> SelectContext(const Document &doc,
                                                  size_t mention,
                                                  size_t window) {
  std::vector<std::pair<size_t, int>> context;
  for (size_t k = 0; k < doc.mentions.size(); ++k) {
    if (k == mention || doc.mentions[k].candidates.empty()) continue;
    context.emplace_back(k, TokenDistance(doc.mentions[mention], doc.mentions[k]));
  }
  std::stable_sort(context.begin(), context.end(),
                   [](const auto &a, const auto &b) { return a.second < b.second; });
  if (window > 0 && context.size() > window) context.resize(window);
  return context;
}

FeatureTensors Featurize(const Document &doc, const FeatureExtractor &extractor,
                         size_t context_window) {
  const size_t n = doc.mentions.size();
  std::vector<size_t> num_candidates(n);
  std::vector<std::vector<std::pair<size_t, int>>> context(n);
  for (size_t i = 0; i < n; ++i) {
    num_candidates[i] = doc.mentions[i].candidates.size();
    if (num_candidates[i] > 0) {
      context[i] = SelectContext(doc, i, context_window);
    }
  }
  const FeatureSet set = extractor.feature_set();
  FeatureTensors t = FeatureTensors::Allocate(UnaryDim(set), BinaryDim(set),
                                              num_candidates, context);
  for (size_t i = 0; i < n; ++i) {
    const auto &candidates = doc.mentions[i].candidates;
    for (size_t j = 0; j < candidates.size(); ++j) {
      const std::vector<double> phi = extractor.Unary(doc, i, j);
      std::copy(phi.begin(), phi.end(), t.MutableUnary(i, j).begin());
    }
    for (size_t c = 0; c < t.context[i].size(); ++c) {
      const auto &others = doc.mentions[t.context[i][c].mention].candidates;
      for (size_t j = 0; j < candidates.size(); ++j) {
        for (size_t w = 0; w < others.size(); ++w) {
          const std::vector<double> psi =
              extractor.Binary(candidates[j].entity, others[w].entity);
          std::copy(psi.begin(), psi.end(), t.MutableBinary(i, c, j, w).begin());
        }
      }
    }
  }
  return t;
}

TrainingExample MakeExample(const Document &doc,
                            const FeatureExtractor &extractor,
                            size_t context_window) {
  TrainingExample example{Featurize(doc, extractor, context_window), {}};
  for (const Mention &m : doc.mentions) {
    if (!m.gold) {
      example.gold.push_back(TrainingExample::kNoGold);
    } else if (auto index = m.GoldIndex()) {
      example.gold.push_back(static_cast<int>(*index));
    } else {
      example.gold.push_back(TrainingExample::kGoldMissing);
    }
  }
  return example;
}

}  // namespace xel
