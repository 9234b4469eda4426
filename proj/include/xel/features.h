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

#ifndef XEL_FEATURES_H_
#define XEL_FEATURES_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xel/corpus.h"
#include "xel/kb_stats.h"

namespace xel {

// BASE keeps the mention-entity prior and the co-occurrence probability;
// FEAT adds the remaining unary and binary features. BASE vectors are the
// prefix of FEAT vectors.
enum class FeatureSet { kBase, kFeat };

int UnaryDim(FeatureSet set);
int BinaryDim(FeatureSet set);
std::string_view FeatureSetName(FeatureSet set);
FeatureSet ParseFeatureSet(std::string_view name);

// Pretrained entity vectors. Text format: "N dim" header, then
// "entity\tv1 v2 ... v_dim" per line.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(int dim);

  void Add(const EntityId &entity, std::vector<double> vector);
  const std::vector<double> *Find(const EntityId &entity) const;

  // Cosine similarity; 0 when either vector is missing or has zero norm.
  double Cosine(const EntityId &a, const EntityId &b) const;

  int dim() const { return dim_; }
  size_t size() const { return vectors_.size(); }

  static EmbeddingStore Load(const std::filesystem::path &path);
  void Save(const std::filesystem::path &path) const;

 private:
  int dim_;
  std::unordered_map<EntityId, std::vector<double>> vectors_;
};

// Computes unary and binary feature vectors against fixed statistics.
// Every value is finite: log arguments are clamped below by epsilon.
//
// Unary, in order:
//   ln max(p(e|m), eps)
//   ln max(c(e) / sum c, eps)
//   #other mentions with some candidate co-occurring with e (pair count > 0)
//   #other mentions whose candidate list contains e
// Binary (a is the entity being scored), in order:
//   ln max(c(a,b) / c(a), eps)
//   max(log2(p(a,b) / (p'(a) p'(b))), 0),  p'(e) = c(e)^g / sum c^g
//   cosine(V_a, V_b)
//   ln max(mult of b among a's page links / #a's page links, eps)
class FeatureExtractor {
 public:
  FeatureExtractor(const KbStatistics &stats, const EmbeddingStore *embeddings,
                   FeatureSet set);

  std::vector<double> Unary(const Document &doc, size_t mention,
                            size_t candidate) const;
  std::vector<double> Binary(const EntityId &a, const EntityId &b) const;

  FeatureSet feature_set() const { return set_; }

 private:
  double ClampedLog(double ratio) const;

  const KbStatistics &stats_;
  const EmbeddingStore *embeddings_;
  FeatureSet set_;
  double smoothed_total_ = 0.0;
  std::unordered_map<EntityId, int64_t> outlink_totals_;
};

// One context mention k of mention i with the offset of the
// K_i x K_k x binary_dim block of pair features.
struct ContextLink {
  size_t mention;
  int distance;
  size_t offset;
};

// Features of one document. Unary vectors are stored per (mention,
// candidate); binary vectors per (mention i, context link n, candidate j of
// i, candidate w of the linked mention).
struct FeatureTensors {
  int unary_dim = 0;
  int binary_dim = 0;
  std::vector<size_t> num_candidates;
  std::vector<size_t> unary_offset;
  std::vector<double> unary;
  // Context links of every mention, nearest first (ties by position).
  std::vector<std::vector<ContextLink>> context;
  std::vector<double> binary;

  size_t num_mentions() const { return num_candidates.size(); }

  std::span<const double> Unary(size_t i, size_t j) const {
    return {unary.data() + unary_offset[i] + j * unary_dim,
            static_cast<size_t>(unary_dim)};
  }
  std::span<double> MutableUnary(size_t i, size_t j) {
    return {unary.data() + unary_offset[i] + j * unary_dim,
            static_cast<size_t>(unary_dim)};
  }
  std::span<const double> Binary(size_t i, size_t n, size_t j,
                                 size_t w) const {
    const ContextLink &link = context[i][n];
    return {binary.data() + BinaryOffset(link, j, w),
            static_cast<size_t>(binary_dim)};
  }
  std::span<double> MutableBinary(size_t i, size_t n, size_t j, size_t w) {
    const ContextLink &link = context[i][n];
    return {binary.data() + BinaryOffset(link, j, w),
            static_cast<size_t>(binary_dim)};
  }

  // Allocates zeroed storage for the given shape. context[i] lists
  // (mention, distance) pairs; offsets are filled in.
  static FeatureTensors Allocate(
      int unary_dim, int binary_dim, std::vector<size_t> num_candidates,
      const std::vector<std::vector<std::pair<size_t, int>>> &context);

 private:
  size_t BinaryOffset(const ContextLink &link, size_t j, size_t w) const {
    return link.offset +
           (j * num_candidates[link.mention] + w) * binary_dim;
  }
};

// Other mentions of `mention` that have candidates, nearest first by token
// distance, ties by document position; at most `window` of them (0 = all).
std::vector<std::pair<size_t, int>> SelectContext(const Document &doc,
                                                  size_t mention,
                                                  size_t window);

FeatureTensors Featurize(const Document &doc, const FeatureExtractor &extractor,
                         size_t context_window);

// Featurized document with gold positions: the candidate index, kGoldMissing
// when the gold entity is not among the candidates, kNoGold when the mention
// is unlabeled or outside the KB.
struct TrainingExample {
  static constexpr int kGoldMissing = -1;
  static constexpr int kNoGold = -2;

  FeatureTensors tensors;
  std::vector<int> gold;
};

TrainingExample MakeExample(const Document &doc,
                            const FeatureExtractor &extractor,
                            size_t context_window);

}  // namespace xel

#endif  // XEL_FEATURES_H_
