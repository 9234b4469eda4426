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

#include "xel/kb_stats.h"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "xel/error.h"

namespace xel {

using json = nlohmann::json;

namespace {

constexpr int kStoreFormatVersion = 1;
constexpr char kMetaFile[] = "meta.json";
constexpr char kEntityFile[] = "entity_counts.tsv";
constexpr char kPairFile[] = "pair_counts.tsv";
constexpr char kOutlinkFile[] = "outlinks.tsv";

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

int64_t ParseCount(std::string_view field) {
  size_t used = 0;
  int64_t value = 0;
  try {
    value = std::stoll(std::string(field), &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != field.size() || field.empty() || value < 0) {
    throw Error("bad count '" + std::string(field) + "'");
  }
  return value;
}

std::string Crc32Hex(const std::string &bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef *>(bytes.data()),
              static_cast<uInt>(bytes.size()));
  std::ostringstream out;
  out << std::hex << std::setw(8) << std::setfill('0') << crc;
  return out.str();
}

std::string ReadWholeFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing store file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteWholeFile(const std::filesystem::path &path,
                    const std::string &bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  out.flush();
  if (!out) throw Error("cannot write " + path.string());
}

template <typename Fn>
void ForEachTsvRow(const std::string &bytes, const std::string &name,
                   size_t num_fields, Fn &&fn) {
  std::istringstream in(bytes);
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto fields = SplitTabs(line);
    try {
      if (fields.size() != num_fields) throw Error("wrong field count");
      fn(fields);
    } catch (const Error &e) {
      throw Error(name + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
}

}  // namespace

AnchorPage ParseAnchorPageLine(std::string_view line) {
  const json j = json::parse(line);
  AnchorPage page{EntityId(j.at("page").get<std::string>()), {}};
  for (const json &link : j.at("links")) {
    std::string surface = link.at("surface").get<std::string>();
    if (surface.empty()) throw Error("empty anchor surface");
    page.links.push_back(
        {std::move(surface), EntityId(link.at("entity").get<std::string>())});
  }
  return page;
}

std::string FormatAnchorPageLine(const AnchorPage &page) {
  json links = json::array();
  for (const AnchorLink &link : page.links) {
    links.push_back({{"surface", link.surface}, {"entity", link.target.str()}});
  }
  return json{{"page", page.page.str()}, {"links", links}}.dump();
}

void ForEachAnchorPage(const std::filesystem::path &path,
                       const std::function<void(const AnchorPage &)> &fn) {
  ForEachLine(path, [&](size_t line_number, std::string_view line) {
    AnchorPage page{EntityId("_"), {}};
    try {
      page = ParseAnchorPageLine(line);
    } catch (const json::exception &e) {
      throw Error(path.string() + ":" + std::to_string(line_number) +
                  ": malformed JSON: " + e.what());
    } catch (const Error &e) {
      throw Error(path.string() + ":" + std::to_string(line_number) + ": " +
                  e.what());
    }
    fn(page);
  });
}

std::vector<AnchorPage> ReadAnchorPages(const std::filesystem::path &path) {
  std::vector<AnchorPage> pages;
  ForEachAnchorPage(path, [&](const AnchorPage &p) { pages.push_back(p); });
  return pages;
}

EntityPair MakeEntityPair(const EntityId &a, const EntityId &b) {
  return a < b ? EntityPair(a, b) : EntityPair(b, a);
}

void KbStatistics::AddPage(const AnchorPage &page) {
  std::set<EntityId> targets;
  for (const AnchorLink &link : page.links) {
    ++entity_count[link.target];
    ++total_anchor_count;
    ++outlinks[page.page][link.target];
    targets.insert(link.target);
  }
  for (auto a = targets.begin(); a != targets.end(); ++a) {
    for (auto b = std::next(a); b != targets.end(); ++b) {
      ++pair_count[EntityPair(*a, *b)];
      ++total_pair_count;
    }
  }
}

int64_t KbStatistics::EntityCount(const EntityId &e) const {
  auto it = entity_count.find(e);
  return it == entity_count.end() ? 0 : it->second;
}

int64_t KbStatistics::PairCount(const EntityId &a, const EntityId &b) const {
  if (a == b) return 0;
  auto it = pair_count.find(MakeEntityPair(a, b));
  return it == pair_count.end() ? 0 : it->second;
}

int64_t KbStatistics::OutlinkCount(const EntityId &page,
                                   const EntityId &target) const {
  auto it = outlinks.find(page);
  if (it == outlinks.end()) return 0;
  auto jt = it->second.find(target);
  return jt == it->second.end() ? 0 : jt->second;
}

void KbStatistics::CheckInvariants() const {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (!(smoothing > 0.0 && smoothing <= 1.0)) {
    throw Error("smoothing must lie in (0,1]");
  }
  int64_t anchors = 0;
  for (const auto &[e, count] : entity_count) anchors += count;
  if (anchors != total_anchor_count) {
    throw Error("total_anchor_count does not match entity counts");
  }
  int64_t pairs = 0;
  for (const auto &[pair, count] : pair_count) {
    if (!(pair.first < pair.second)) throw Error("pair key not ordered");
    if (!entity_count.contains(pair.first) ||
        !entity_count.contains(pair.second)) {
      throw Error("pair entity without an entity count");
    }
    pairs += count;
  }
  if (pairs != total_pair_count) {
    throw Error("total_pair_count does not match pair counts");
  }
}

KbStatistics Ingest(std::span<const AnchorPage> pages, double epsilon,
                    double smoothing) {
  KbStatistics stats;
  stats.epsilon = epsilon;
  stats.smoothing = smoothing;
  for (const AnchorPage &page : pages) stats.AddPage(page);
  return stats;
}

KbStatistics Merge(const KbStatistics &a, const KbStatistics &b) {
  if (a.epsilon != b.epsilon || a.smoothing != b.smoothing) {
    throw Error("cannot merge statistics built with different constants");
  }
  KbStatistics merged = a;
  for (const auto &[e, count] : b.entity_count) merged.entity_count[e] += count;
  for (const auto &[pair, count] : b.pair_count) {
    merged.pair_count[pair] += count;
  }
  for (const auto &[page, targets] : b.outlinks) {
    auto &row = merged.outlinks[page];
    for (const auto &[target, count] : targets) row[target] += count;
  }
  merged.total_anchor_count += b.total_anchor_count;
  merged.total_pair_count += b.total_pair_count;
  return merged;
}

void SaveStats(const KbStatistics &stats, const std::filesystem::path &dir) {
  stats.CheckInvariants();
  std::filesystem::create_directories(dir);

  std::map<std::string, int64_t> entities;
  for (const auto &[e, count] : stats.entity_count) entities[e.str()] = count;
  std::ostringstream entity_tsv;
  for (const auto &[e, count] : entities) entity_tsv << e << '\t' << count << '\n';

  std::map<std::pair<std::string, std::string>, int64_t> pairs;
  for (const auto &[pair, count] : stats.pair_count) {
    pairs[{pair.first.str(), pair.second.str()}] = count;
  }
  std::ostringstream pair_tsv;
  for (const auto &[pair, count] : pairs) {
    pair_tsv << pair.first << '\t' << pair.second << '\t' << count << '\n';
  }

  std::map<std::pair<std::string, std::string>, int64_t> links;
  for (const auto &[page, targets] : stats.outlinks) {
    for (const auto &[target, count] : targets) {
      links[{page.str(), target.str()}] = count;
    }
  }
  std::ostringstream outlink_tsv;
  for (const auto &[key, count] : links) {
    outlink_tsv << key.first << '\t' << key.second << '\t' << count << '\n';
  }

  const std::string files[3][2] = {{kEntityFile, entity_tsv.str()},
                                   {kPairFile, pair_tsv.str()},
                                   {kOutlinkFile, outlink_tsv.str()}};
  json checksums = json::object();
  for (const auto &[name, bytes] : files) {
    WriteWholeFile(dir / name, bytes);
    checksums[name] = "crc32:" + Crc32Hex(bytes);
  }
  const json meta = {{"format_version", kStoreFormatVersion},
                     {"epsilon", stats.epsilon},
                     {"smoothing", stats.smoothing},
                     {"total_anchor_count", stats.total_anchor_count},
                     {"total_pair_count", stats.total_pair_count},
                     {"checksums", checksums}};
  WriteWholeFile(dir / kMetaFile, meta.dump(2) + "\n");
}

KbStatistics LoadStats(const std::filesystem::path &dir) {
  const std::filesystem::path meta_path = dir / kMetaFile;
  if (!std::filesystem::exists(meta_path)) {
    throw Error("missing store manifest " + meta_path.string());
  }
  KbStatistics stats;
  json meta;
  try {
    meta = json::parse(ReadWholeFile(meta_path));
    const int version = meta.at("format_version").get<int>();
    if (version != kStoreFormatVersion) {
      throw Error(meta_path.string() + ": unsupported format_version " +
                  std::to_string(version));
    }
    stats.epsilon = meta.at("epsilon").get<double>();
    stats.smoothing = meta.at("smoothing").get<double>();
  } catch (const json::exception &e) {
    throw Error(meta_path.string() + ": " + e.what());
  }

  auto read_checked = [&](const char *name) {
    const std::string bytes = ReadWholeFile(dir / name);
    std::string expected;
    try {
      expected = meta.at("checksums").at(name).get<std::string>();
    } catch (const json::exception &) {
      throw Error(meta_path.string() + ": no checksum for " + name);
    }
    if (expected != "crc32:" + Crc32Hex(bytes)) {
      throw Error("checksum mismatch in " + (dir / name).string());
    }
    return bytes;
  };

  ForEachTsvRow(read_checked(kEntityFile), kEntityFile, 2, [&](auto &f) {
    const int64_t count = ParseCount(f[1]);
    stats.entity_count[EntityId(f[0])] = count;
    stats.total_anchor_count += count;
  });
  ForEachTsvRow(read_checked(kPairFile), kPairFile, 3, [&](auto &f) {
    const int64_t count = ParseCount(f[2]);
    stats.pair_count[MakeEntityPair(EntityId(f[0]), EntityId(f[1]))] = count;
    stats.total_pair_count += count;
  });
  ForEachTsvRow(read_checked(kOutlinkFile), kOutlinkFile, 3, [&](auto &f) {
    stats.outlinks[EntityId(f[0])][EntityId(f[1])] = ParseCount(f[2]);
  });

  if (stats.total_anchor_count != meta.value("total_anchor_count", int64_t{-1}) ||
      stats.total_pair_count != meta.value("total_pair_count", int64_t{-1})) {
    throw Error(meta_path.string() + ": totals disagree with the TSV files");
  }
  stats.CheckInvariants();
  return stats;
}

BilingualMap ReadBilingualMap(const std::filesystem::path &path) {
  BilingualMap map;
  ForEachLine(path, [&](size_t line_number, std::string_view line) {
    const auto fields = SplitTabs(line);
    const std::string where = path.string() + ":" + std::to_string(line_number);
    if (fields.size() != 2) throw Error(where + ": expected 2 fields");
    EntityId source(fields[0]);
    EntityId target(fields[1]);
    auto [it, inserted] = map.emplace(source, target);
    if (!inserted && it->second != target) {
      throw Error(where + ": '" + source.str() + "' mapped twice");
    }
  });
  return map;
}

}  // namespace xel
