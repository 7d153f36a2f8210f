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

#include "dualknow/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dualknow/error.hpp"
#include "dualknow/text.hpp"

namespace dualknow {

void RetrievalConfig::validate() const {
  if (!(theta >= -1.0 && theta <= 1.0))
    throw ConfigError("retrieval.theta must lie in [-1, 1]");
  if (max_reviews_per_entity < 0)
    throw ConfigError("retrieval.max_reviews_per_entity must be >= 0");
  if (max_knowledge_chars <= 0)
    throw ConfigError("retrieval.max_knowledge_chars must be > 0");
}

std::string_view to_string(HitSource source) {
  return source == HitSource::kTextMatch ? "text_match" : "visual_match";
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

std::vector<KnowledgeHit> match_text_entities(const DialogContext& context,
                                              const KnowledgeBase& kb) {
  const std::string haystack = text::collapse_whitespace(text::to_lower(context.merged_text));
  if (haystack.empty()) return {};

  struct Found {
    std::size_t position;
    std::size_t order;
  };
  std::vector<Found> found;
  const auto& entities = kb.entities();
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const std::string needle = text::normalize_name(entities[i].name);
    if (needle.empty()) continue;
    const std::size_t pos = haystack.find(needle);
    if (pos != std::string::npos) found.push_back({pos, i});
  }
  std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
    return a.position != b.position ? a.position < b.position : a.order < b.order;
  });

  std::vector<KnowledgeHit> hits;
  hits.reserve(found.size());
  for (const auto& f : found)
    hits.push_back({entities[f.order].entity_id, HitSource::kTextMatch, 1.0});
  return hits;
}

std::vector<KnowledgeHit> match_visual_entities(const DialogContext& context,
                                                const KnowledgeBase& kb,
                                                const RetrievalConfig& config) {
  if (context.image_embeddings.empty() || !kb.embedding_dim()) return {};
  const std::size_t dim = *kb.embedding_dim();
  for (const auto& q : context.image_embeddings) {
    if (q.size() != dim)
      throw PreconditionError("context embedding dimension " + std::to_string(q.size()) +
                              " does not match knowledge base dimension " +
                              std::to_string(dim));
  }

  struct Scored {
    double score;
    std::size_t order;
  };
  std::vector<Scored> scored;
  const auto& entities = kb.entities();
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto& images = entities[i].image_embeddings;
    if (images.empty()) continue;
    // Best over the entity's images for each context image, then best over
    // context images.
    double best = -2.0;
    for (const auto& q : context.image_embeddings)
      for (const auto& img : images) best = std::max(best, cosine_similarity(q, img));
    if (best > config.theta) scored.push_back({best, i});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.score != b.score ? a.score > b.score : a.order < b.order;
  });

  std::vector<KnowledgeHit> hits;
  hits.reserve(scored.size());
  for (const auto& s : scored)
    hits.push_back({entities[s.order].entity_id, HitSource::kVisualMatch, s.score});
  return hits;
}

std::string serialize_attributes(const KnowledgeEntity& entity) {
  std::vector<std::string> pairs;
  pairs.reserve(entity.attributes.size());
  for (const auto& a : entity.attributes) pairs.push_back(a.key + " " + a.value);
  return text::join(pairs, ", ");
}

DualKnowledge extract_dual_knowledge(const DialogContext& context,
                                     const KnowledgeBase& kb,
                                     const RetrievalConfig& config) {
  DualKnowledge knowledge;
  std::unordered_set<std::string> seen;
  for (auto& hit : match_text_entities(context, kb))
    if (seen.insert(hit.entity_id).second) knowledge.hits.push_back(std::move(hit));
  for (auto& hit : match_visual_entities(context, kb, config))
    if (seen.insert(hit.entity_id).second) knowledge.hits.push_back(std::move(hit));

  std::vector<std::string> attribute_blocks;
  std::vector<std::string> reviews;
  const auto review_cap = static_cast<std::size_t>(config.max_reviews_per_entity);
  for (const auto& hit : knowledge.hits) {
    const KnowledgeEntity& entity = kb.entities()[*kb.find(hit.entity_id)];
    if (!entity.attributes.empty()) {
      attribute_blocks.push_back(serialize_attributes(entity));
      ++knowledge.attribute_entities;
    }
    const std::size_t take = std::min(review_cap, entity.reviews.size());
    if (take > 0) ++knowledge.review_entities;
    reviews.insert(reviews.end(), entity.reviews.begin(),
                   entity.reviews.begin() + static_cast<std::ptrdiff_t>(take));
  }

  const auto cap = static_cast<std::size_t>(config.max_knowledge_chars);
  knowledge.attribute_text = text::truncate_at_whitespace(text::join(attribute_blocks, "; "), cap);
  knowledge.review_text = text::truncate_at_whitespace(text::join(reviews, " | "), cap);
  return knowledge;
}

}  // namespace dualknow
