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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "xel/error.h"
#include "xel/text.h"

namespace xel {

using json = nlohmann::json;

EntityId::EntityId(std::string_view title) : title_(CollapseWhitespace(title)) {
  if (title_.empty()) throw Error("empty entity id");
}

std::ostream &operator<<(std::ostream &os, const EntityId &id) {
  return os << id.str();
}

std::optional<size_t> Mention::GoldIndex() const {
  if (!gold) return std::nullopt;
  for (size_t j = 0; j < candidates.size(); ++j) {
    if (candidates[j].entity == *gold) return j;
  }
  return std::nullopt;
}

void Document::Validate() const {
  const int num_tokens = static_cast<int>(tokens.size());
  std::set<std::string_view> ids;
  for (const Mention &m : mentions) {
    const std::string where = "document '" + id + "' mention '" + m.id + "'";
    if (!ids.insert(m.id).second) throw Error("duplicate " + where);
    if (m.start < 0 || m.start >= m.end || m.end > num_tokens) {
      throw Error(where + ": span [" + std::to_string(m.start) + "," +
                  std::to_string(m.end) + ") outside " +
                  std::to_string(num_tokens) + " tokens");
    }
    std::set<std::string_view> seen;
    for (const Candidate &c : m.candidates) {
      if (!seen.insert(c.entity.str()).second) {
        throw Error(where + ": duplicate candidate '" + c.entity.str() + "'");
      }
      if (!(c.p >= 0.0 && c.p <= 1.0)) {
        throw Error(where + ": candidate probability out of [0,1]");
      }
    }
  }
}

void Document::SortMentions() {
  std::sort(mentions.begin(), mentions.end(),
            [](const Mention &a, const Mention &b) {
              return std::tie(a.start, a.end, a.id) <
                     std::tie(b.start, b.end, b.id);
            });
}

int TokenDistance(const Mention &a, const Mention &b) {
  if (a.end <= b.start) return b.start - a.end;
  if (b.end <= a.start) return a.start - b.end;
  return 0;
}

namespace {

Mention MentionFromJson(const json &j) {
  Mention m;
  m.id = j.at("id").get<std::string>();
  m.start = j.at("start").get<int>();
  m.end = j.at("end").get<int>();
  m.surface = j.value("surface", std::string());
  if (auto it = j.find("gold"); it != j.end() && !it->is_null()) {
    m.gold = EntityId(it->get<std::string>());
  }
  if (auto it = j.find("candidates"); it != j.end() && !it->is_null()) {
    for (const json &c : *it) {
      m.candidates.push_back(
          {EntityId(c.at("entity").get<std::string>()), c.at("p").get<double>()});
    }
  }
  return m;
}

json MentionToJson(const Mention &m) {
  json candidates = json::array();
  for (const Candidate &c : m.candidates) {
    candidates.push_back({{"entity", c.entity.str()}, {"p", c.p}});
  }
  return {{"id", m.id},
          {"start", m.start},
          {"end", m.end},
          {"surface", m.surface},
          {"gold", m.gold ? json(m.gold->str()) : json(nullptr)},
          {"candidates", std::move(candidates)}};
}

}  // namespace

Document ParseDocumentLine(std::string_view line) {
  Document doc;
  try {
    const json j = json::parse(line);
    doc.id = j.at("doc_id").get<std::string>();
    doc.tokens = j.at("tokens").get<std::vector<std::string>>();
    for (const json &m : j.at("mentions")) {
      doc.mentions.push_back(MentionFromJson(m));
    }
  } catch (const json::exception &e) {
    throw Error(std::string("malformed document: ") + e.what());
  }
  doc.Validate();
  doc.SortMentions();
  return doc;
}

std::string FormatDocumentLine(const Document &doc) {
  json mentions = json::array();
  for (const Mention &m : doc.mentions) mentions.push_back(MentionToJson(m));
  const json j = {
      {"doc_id", doc.id}, {"tokens", doc.tokens}, {"mentions", mentions}};
  return j.dump();
}

void ForEachLine(const std::filesystem::path &path,
                 const std::function<void(size_t, std::string_view)> &fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(line_number, line);
  }
}

namespace {

// Prefixes errors raised while handling one line with file:line.
template <typename Fn>
void WithLineContext(const std::filesystem::path &path, size_t line_number,
                     Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    throw Error(path.string() + ":" + std::to_string(line_number) + ": " +
                e.what());
  } catch (const json::exception &e) {
    throw Error(path.string() + ":" + std::to_string(line_number) +
                ": malformed JSON: " + e.what());
  }
}

void WriteFile(const std::filesystem::path &path,
               const std::function<void(std::ostream &)> &fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  fn(out);
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

std::vector<Document> ReadCorpus(const std::filesystem::path &path) {
  std::vector<Document> docs;
  ForEachLine(path, [&](size_t line_number, std::string_view line) {
    WithLineContext(path, line_number,
                    [&] { docs.push_back(ParseDocumentLine(line)); });
  });
  return docs;
}

void WriteCorpus(std::span<const Document> docs,
                 const std::filesystem::path &path) {
  WriteFile(path, [&](std::ostream &out) {
    for (const Document &doc : docs) out << FormatDocumentLine(doc) << '\n';
  });
}

void WriteLinked(std::span<const Document> docs,
                 const Predictions &predictions, std::ostream &out) {
  size_t matched = 0;
  for (const Document &doc : docs) {
    json mentions = json::array();
    for (const Mention &m : doc.mentions) {
      auto it = predictions.find({doc.id, m.id});
      json prediction = nullptr;
      if (it != predictions.end()) {
        prediction = it->second.str();
        ++matched;
      }
      mentions.push_back({{"id", m.id}, {"prediction", prediction}});
    }
    out << json{{"doc_id", doc.id}, {"mentions", mentions}}.dump() << '\n';
  }
  if (matched != predictions.size()) {
    for (const auto &[key, entity] : predictions) {
      bool found = false;
      for (const Document &doc : docs) {
        if (doc.id != key.first) continue;
        for (const Mention &m : doc.mentions) found |= m.id == key.second;
      }
      if (!found) {
        throw Error("prediction for unknown mention '" + key.first + "/" +
                    key.second + "'");
      }
    }
    throw Error("predictions reference duplicated document ids");
  }
}

void WriteLinked(std::span<const Document> docs,
                 const Predictions &predictions,
                 const std::filesystem::path &path) {
  // Render first so a bad key leaves no partial file behind.
  std::ostringstream buffer;
  WriteLinked(docs, predictions, buffer);
  WriteFile(path, [&](std::ostream &out) { out << buffer.str(); });
}

Predictions ReadPredictions(const std::filesystem::path &path) {
  Predictions predictions;
  ForEachLine(path, [&](size_t line_number, std::string_view line) {
    WithLineContext(path, line_number, [&] {
      const json j = json::parse(line);
      const std::string doc_id = j.at("doc_id").get<std::string>();
      for (const json &m : j.at("mentions")) {
        const json &prediction = m.at("prediction");
        if (prediction.is_null()) continue;
        predictions.insert_or_assign({doc_id, m.at("id").get<std::string>()},
                                     EntityId(prediction.get<std::string>()));
      }
    });
  });
  return predictions;
}

}  // namespace xel
