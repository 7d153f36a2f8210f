// Copyright 2026 The dualknow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Exhaustive visual scan: every context image against every entity image,
// max over both, keep strictly above theta.

#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dualknow/corpus.hpp"

namespace oracle {

inline double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  double c = static_cast<double>(dot / std::sqrt(na * nb));
  return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

inline std::map<std::string, double> visual_scan(const dualknow::KnowledgeBase& kb,
                                                 const std::vector<std::vector<float>>& queries,
                                                 double theta) {
  std::map<std::string, double> kept;
  for (const auto& e : kb.entities()) {
    double best = -2.0;
    for (const auto& q : queries)
      for (const auto& v : e.image_embeddings) best = std::max(best, cosine(q, v));
    if (!e.image_embeddings.empty() && !queries.empty() && best > theta) kept[e.entity_id] = best;
  }
  return kept;
}

inline std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0;
  for (auto& x : v) {
    x = g(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

inline dualknow::KnowledgeBase synthetic_kb(std::mt19937_64& rng, std::size_t entities,
                                            std::size_t images, std::size_t dim) {
  std::vector<dualknow::KnowledgeEntity> out;
  for (std::size_t i = 0; i < entities; ++i) {
    dualknow::KnowledgeEntity e;
    e.entity_id = "e" + std::to_string(i);
    e.name = "entity " + std::to_string(i);
    e.attributes = {{"venuename", e.name}};
    for (std::size_t j = 0; j < images; ++j) {
      e.image_ids.push_back(e.entity_id + "_img" + std::to_string(j));
      e.image_embeddings.push_back(random_unit(rng, dim));
    }
    out.push_back(std::move(e));
  }
  return dualknow::KnowledgeBase(std::move(out));
}

}  // namespace oracle
