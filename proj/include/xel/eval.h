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

#ifndef XEL_EVAL_H_
#define XEL_EVAL_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xel/corpus.h"

namespace xel {

// Decides whether a gold entity exists in the target KB. An empty function
// accepts every entity.
using KbMembership = std::function<bool(const EntityId &)>;

struct DocumentEval {
  std::string doc_id;
  size_t n_mentions = 0;
  size_t n_in_kb = 0;
  size_t covered = 0;  // gold entity among the candidates
  size_t correct = 0;
};

struct EvalReport {
  size_t n_mentions = 0;
  size_t n_in_kb = 0;
  size_t covered = 0;
  size_t correct = 0;
  double gold_recall = 0.0;
  double accuracy = 0.0;
  // True when every prediction names a candidate of its mention, in which
  // case accuracy <= gold_recall is checked.
  bool predictions_from_candidates = true;
  std::vector<DocumentEval> per_document;
};

// Fraction of in-KB gold mentions whose candidate list holds the gold
// entity. Mentions without gold are ignored. Throws Error("no evaluable
// mentions") when nothing is in the KB.
double GoldCandidateRecall(std::span<const Document> docs,
                           const KbMembership &in_kb = {});

// Fraction of in-KB gold mentions predicted correctly; a missing
// prediction is wrong.
double Accuracy(std::span<const Document> docs, const Predictions &predictions,
                const KbMembership &in_kb = {});

// Per-document counts may be computed on `jobs` threads; the report does
// not depend on it.
EvalReport Evaluate(std::span<const Document> docs,
                    const Predictions &predictions,
                    const KbMembership &in_kb = {}, int jobs = 1);

}  // namespace xel

#endif  // XEL_EVAL_H_
