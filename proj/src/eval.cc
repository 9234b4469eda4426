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

#include <cstdint>

#include "xel/error.h"
#include "xel/parallel.h"

namespace xel {

EvalReport Evaluate(std::span<const Document> docs,
                    const Predictions &predictions, const KbMembership &in_kb,
                    int jobs) {
  std::vector<DocumentEval> per_doc(docs.size());
  std::vector<uint8_t> from_candidates(docs.size(), 1);
  ParallelFor(docs.size(), jobs, [&](size_t index) {
    const Document &doc = docs[index];
    DocumentEval &d = per_doc[index];
    d = {doc.id, doc.mentions.size(), 0, 0, 0};
    for (const Mention &m : doc.mentions) {
      auto it = predictions.find({doc.id, m.id});
      const EntityId *prediction = it == predictions.end() ? nullptr : &it->second;
      if (prediction != nullptr) {
        bool listed = false;
        for (const Candidate &c : m.candidates) listed |= c.entity == *prediction;
        from_candidates[index] &= listed;
      }
      if (!m.gold || (in_kb && !in_kb(*m.gold))) continue;
      ++d.n_in_kb;
      d.covered += m.GoldIndex().has_value();
      d.correct += prediction != nullptr && *prediction == *m.gold;
    }
  });
  EvalReport report;
  for (size_t index = 0; index < docs.size(); ++index) {
    const DocumentEval &d = per_doc[index];
    report.n_mentions += d.n_mentions;
    report.n_in_kb += d.n_in_kb;
    report.covered += d.covered;
    report.correct += d.correct;
    report.predictions_from_candidates &= from_candidates[index] != 0;
  }
  report.per_document = std::move(per_doc);
  if (report.n_in_kb == 0) throw Error("no evaluable mentions");
  const double denominator = static_cast<double>(report.n_in_kb);
  report.gold_recall = report.covered / denominator;
  report.accuracy = report.correct / denominator;
  if (report.predictions_from_candidates && report.correct > report.covered) {
    throw Error("accuracy exceeds gold candidate recall");
  }
  return report;
}

double GoldCandidateRecall(std::span<const Document> docs,
                           const KbMembership &in_kb) {
  return Evaluate(docs, {}, in_kb).gold_recall;
}

double Accuracy(std::span<const Document> docs, const Predictions &predictions,
                const KbMembership &in_kb) {
  return Evaluate(docs, predictions, in_kb).accuracy;
}

}  // namespace xel
