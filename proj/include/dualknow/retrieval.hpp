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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dualknow/corpus.hpp"

namespace dualknow {

struct RetrievalConfig {
  /// Visual similarity threshold; an entity is kept when its score is
  /// strictly greater.
  double theta = 0.1;
  int max_reviews_per_entity = 5;
  int max_knowledge_chars = 4000;

  /// Throws ConfigError when out of range.
  void validate() const;
};

enum class HitSource { kTextMatch, kVisualMatch };

std::string_view to_string(HitSource source);

struct KnowledgeHit {
  std::string entity_id;
  HitSource source = HitSource::kTextMatch;
  /// 1.0 for text matches, best cosine similarity for visual matches.
  double score = 1.0;

  friend bool operator==(const KnowledgeHit&, const KnowledgeHit&) = default;
};

/// Context-related attribute and review knowledge, serialized for prompting.
struct DualKnowledge {
  std::vector<KnowledgeHit> hits;
  std::string attribute_text;
  std::string review_text;
  std::size_t attribute_entities = 0;
  std::size_t review_entities = 0;

  friend bool operator==(const DualKnowledge&, const DualKnowledge&) = default;
};

/// Cosine similarity of two equal-length vectors, clamped to [-1, 1].
double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// Entities whose normalized name occurs in the normalized context text,
/// ordered by first occurrence then input order.
std::vector<KnowledgeHit> match_text_entities(const DialogContext& context,
                                              const KnowledgeBase& kb);

/// Entities whose best image similarity to any context image exceeds theta,
/// ordered by descending score then input order.
std::vector<KnowledgeHit> match_visual_entities(const DialogContext& context,
                                                const KnowledgeBase& kb,
                                                const RetrievalConfig& config);

/// "key1 value1, key2 value2" for one entity.
std::string serialize_attributes(const KnowledgeEntity& entity);

DualKnowledge extract_dual_knowledge(const DialogContext& context,
                                     const KnowledgeBase& kb,
                                     const RetrievalConfig& config);

}  // namespace dualknow
