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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace xel::testing {

NaiveCounts::NaiveCounts(std::vector<AnchorPage> pages)
    : pages_(std::move(pages)) {}

int64_t NaiveCounts::Entity(const std::string &e) const {
  int64_t n = 0;
  for (const AnchorPage &page : pages_) {
    for (const AnchorLink &link : page.links) n += link.target.str() == e;
  }
  return n;
}

int64_t NaiveCounts::Pair(const std::string &a, const std::string &b) const {
  if (a == b) return 0;
  int64_t n = 0;
  for (const AnchorPage &page : pages_) {
    bool has_a = false, has_b = false;
    for (const AnchorLink &link : page.links) {
      has_a = has_a || link.target.str() == a;
      has_b = has_b || link.target.str() == b;
    }
    n += has_a && has_b;
  }
  return n;
}

int64_t NaiveCounts::Outlink(const std::string &page,
                             const std::string &target) const {
  int64_t n = 0;
  for (const AnchorPage &p : pages_) {
    if (p.page.str() != page) continue;
    for (const AnchorLink &link : p.links) n += link.target.str() == target;
  }
  return n;
}

int64_t NaiveCounts::OutlinkTotal(const std::string &page) const {
  int64_t n = 0;
  for (const AnchorPage &p : pages_) {
    if (p.page.str() == page) n += p.links.size();
  }
  return n;
}

int64_t NaiveCounts::TotalAnchors() const {
  int64_t n = 0;
  for (const AnchorPage &p : pages_) n += p.links.size();
  return n;
}

int64_t NaiveCounts::TotalPairs() const {
  const std::vector<std::string> entities = Entities();
  int64_t n = 0;
  for (size_t i = 0; i < entities.size(); ++i) {
    for (size_t j = i + 1; j < entities.size(); ++j) {
      n += Pair(entities[i], entities[j]);
    }
  }
  return n;
}

std::vector<std::string> NaiveCounts::Entities() const {
  std::set<std::string> s;
  for (const AnchorPage &p : pages_) {
    for (const AnchorLink &link : p.links) s.insert(link.target.str());
  }
  return {s.begin(), s.end()};
}

std::vector<std::string> NaiveCounts::Pages() const {
  std::set<std::string> s;
  for (const AnchorPage &p : pages_) {
    if (!p.links.empty()) s.insert(p.page.str());
  }
  return {s.begin(), s.end()};
}

std::vector<double> NaiveUnary(const NaiveCounts &counts, const Document &doc,
                               size_t mention, size_t candidate, double eps) {
  const Candidate &c = doc.mentions[mention].candidates[candidate];
  const std::string e = c.entity.str();
  const double total = static_cast<double>(counts.TotalAnchors());
  double related = 0, exact = 0;
  for (size_t k = 0; k < doc.mentions.size(); ++k) {
    if (k == mention) continue;
    bool r = false, x = false;
    for (const Candidate &other : doc.mentions[k].candidates) {
      if (counts.Pair(e, other.entity.str()) > 0) r = true;
      if (other.entity.str() == e) x = true;
    }
    related += r ? 1 : 0;
    exact += x ? 1 : 0;
  }
  return {std::log(std::max(c.p, eps)),
          std::log(total == 0 ? eps : std::max(counts.Entity(e) / total, eps)),
          related, exact};
}

std::vector<double> NaiveBinary(const NaiveCounts &counts,
                                const EmbeddingStore *embeddings,
                                const std::string &a, const std::string &b,
                                double eps, double smoothing) {
  const double ca = counts.Entity(a);
  const double cb = counts.Entity(b);
  const double cab = counts.Pair(a, b);

  const double f1 = ca == 0 ? std::log(eps) : std::log(std::max(cab / ca, eps));

  double f2 = 0.0;
  if (cab > 0) {
    double z = 0.0;
    for (const std::string &x : counts.Entities()) {
      z += std::pow(counts.Entity(x), smoothing);
    }
    const double joint = cab / counts.TotalPairs();
    const double expected =
        (std::pow(ca, smoothing) / z) * (std::pow(cb, smoothing) / z);
    f2 = std::max(std::log2(joint / expected), 0.0);
  }

  double f3 = 0.0;
  if (embeddings != nullptr) {
    const auto *va = embeddings->Find(EntityId(a));
    const auto *vb = embeddings->Find(EntityId(b));
    if (va != nullptr && vb != nullptr) {
      double dot = 0, na = 0, nb = 0;
      for (size_t d = 0; d < va->size(); ++d) {
        dot += (*va)[d] * (*vb)[d];
        na += (*va)[d] * (*va)[d];
        nb += (*vb)[d] * (*vb)[d];
      }
      if (na > 0 && nb > 0) f3 = dot / std::sqrt(na * nb);
    }
  }

  const double links = counts.OutlinkTotal(a);
  const double f4 = links == 0
                        ? std::log(eps)
                        : std::log(std::max(counts.Outlink(a, b) / links, eps));
  return {f1, f2, f3, f4};
}

DenseInstance RandomDenseInstance(std::mt19937_64 &rng, int max_mentions,
                                  int max_candidates, int unary_dim,
                                  int binary_dim) {
  std::uniform_int_distribution<int> mentions(1, max_mentions);
  std::uniform_int_distribution<int> candidates(1, max_candidates);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  DenseInstance inst;
  const int m = mentions(rng);
  std::vector<int> k(m);
  for (int &x : k) x = candidates(rng);
  auto vec = [&](int dim) {
    std::vector<double> v(dim);
    for (double &x : v) x = value(rng);
    return v;
  };
  inst.unary.resize(m);
  inst.pair.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k[i]; ++j) inst.unary[i].push_back(vec(unary_dim));
    inst.pair[i].resize(m);
    for (int o = 0; o < m; ++o) {
      if (o == i) continue;
      inst.pair[i][o].resize(k[i]);
      for (int j = 0; j < k[i]; ++j) {
        for (int w = 0; w < k[o]; ++w) inst.pair[i][o][j].push_back(vec(binary_dim));
      }
    }
  }
  inst.params.w_local = vec(unary_dim);
  inst.params.w_pair = vec(binary_dim);
  return inst;
}

FeatureTensors ToTensors(const DenseInstance &inst) {
  const size_t m = inst.unary.size();
  const int d_l = static_cast<int>(inst.params.w_local.size());
  const int d_g = static_cast<int>(inst.params.w_pair.size());
  std::vector<size_t> k;
  for (const auto &u : inst.unary) k.push_back(u.size());
  // Context order is deliberately reversed to exercise order independence.
  std::vector<std::vector<std::pair<size_t, int>>> context(m);
  for (size_t i = 0; i < m; ++i) {
    for (size_t o = m; o-- > 0;) {
      if (o != i) context[i].push_back({o, static_cast<int>(o)});
    }
  }
  FeatureTensors t = FeatureTensors::Allocate(d_l, d_g, k, context);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < k[i]; ++j) {
      std::copy_n(inst.unary[i][j].begin(), d_l, t.MutableUnary(i, j).begin());
    }
    for (size_t n = 0; n < t.context[i].size(); ++n) {
      const size_t o = t.context[i][n].mention;
      for (size_t j = 0; j < k[i]; ++j) {
        for (size_t w = 0; w < k[o]; ++w) {
          std::copy_n(inst.pair[i][o][j][w].begin(), d_g,
                      t.MutableBinary(i, n, j, w).begin());
        }
      }
    }
  }
  return t;
}

std::vector<std::vector<double>> BruteForceGreedy(const DenseInstance &inst) {
  const size_t m = inst.unary.size();
  auto dot = [](const std::vector<double> &x, const std::vector<double> &w) {
    double s = 0;
    for (size_t d = 0; d < x.size(); ++d) s += x[d] * w[d];
    return s;
  };
  std::vector<std::vector<double>> total(m);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < inst.unary[i].size(); ++j) {
      double global = 0;
      for (size_t o = 0; o < m; ++o) {
        if (o == i) continue;
        double best = -INFINITY;
        for (const auto &psi : inst.pair[i][o][j]) {
          best = std::max(best, dot(psi, inst.params.w_pair));
        }
        global += best;
      }
      total[i].push_back(dot(inst.unary[i][j], inst.params.w_local) +
                         global / static_cast<double>(m));
    }
  }
  return total;
}

}  // namespace xel::testing
