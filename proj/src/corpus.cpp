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

#include "dualknow/corpus.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include "dualknow/error.hpp"
#include "dualknow/jsonl.hpp"
#include "dualknow/text.hpp"

namespace dualknow {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kNormTolerance = 1e-2;
// Already unit length at float precision; rescaling would only perturb bits.
constexpr double kUnitSlack = 1e-6;

std::string entity_label(const KnowledgeEntity& e) {
  return "entity '" + e.entity_id + "'";
}

Speaker parse_speaker(const std::string& s) {
  const std::string lower = text::to_lower(s);
  if (lower == "user") return Speaker::kUser;
  if (lower == "agent" || lower == "system") return Speaker::kAgent;
  throw LoadError("unknown speaker '" + s + "'");
}

}  // namespace

std::string_view to_string(Speaker speaker) {
  return speaker == Speaker::kUser ? "user" : "agent";
}

KnowledgeBase::KnowledgeBase(std::vector<KnowledgeEntity> entities)
    : entities_(std::move(entities)) {
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    const KnowledgeEntity& e = entities_[i];
    if (e.entity_id.empty()) throw LoadError("entity with empty entity_id");
    if (!id_index_.emplace(e.entity_id, i).second)
      throw LoadError("duplicate entity_id: " + e.entity_id);
    if (e.image_ids.size() != e.image_embeddings.size())
      throw LoadError(entity_label(e) + ": image_ids and embeddings differ in length");
    for (const Embedding& v : e.image_embeddings) {
      if (!embedding_dim_) embedding_dim_ = v.size();
      if (v.size() != *embedding_dim_)
        throw LoadError(entity_label(e) + ": embedding dimension mismatch (" +
                        std::to_string(v.size()) + " vs " +
                        std::to_string(*embedding_dim_) + ")");
    }
    std::string key = text::normalize_name(e.name);
    if (!key.empty()) name_index_.emplace(std::move(key), e.entity_id);
    if (e.attributes.empty() && e.reviews.empty())
      warnings_.push_back(entity_label(e) + " has neither attributes nor reviews");
  }
}

std::optional<std::size_t> KnowledgeBase::find(std::string_view entity_id) const {
  auto it = id_index_.find(std::string(entity_id));
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> KnowledgeBase::find_by_name(std::string_view name) const {
  auto it = name_index_.find(text::normalize_name(name));
  if (it == name_index_.end()) return std::nullopt;
  return find(it->second);
}

KnowledgeBaseStats KnowledgeBase::stats() const {
  KnowledgeBaseStats stats;
  stats.entity_count = entities_.size();
  if (entities_.empty()) return stats;
  double attributes = 0, reviews = 0, images = 0;
  for (const auto& e : entities_) {
    attributes += static_cast<double>(e.attributes.size());
    reviews += static_cast<double>(e.reviews.size());
    images += static_cast<double>(e.image_ids.size());
  }
  const auto n = static_cast<double>(entities_.size());
  stats.mean_attributes = attributes / n;
  stats.mean_reviews = reviews / n;
  stats.mean_images = images / n;
  return stats;
}

Embedding normalize_embedding(Embedding vector, std::string_view image_id) {
  double sum = 0.0;
  for (float x : vector) sum += static_cast<double>(x) * x;
  const double norm = std::sqrt(sum);
  if (vector.empty() || !std::isfinite(norm) ||
      std::abs(norm - 1.0) > kNormTolerance) {
    throw LoadError("embedding for '" + std::string(image_id) +
                    "' has norm " + std::to_string(norm) +
                    ", expected 1 within 1e-2");
  }
  if (std::abs(norm - 1.0) <= kUnitSlack) return vector;
  for (float& x : vector) x = static_cast<float>(x / norm);
  return vector;
}

const std::string* AssetStore::caption(const std::string& image_id) const {
  auto it = captions_.find(image_id);
  return it == captions_.end() ? nullptr : &it->second;
}

const Embedding* AssetStore::embedding(const std::string& image_id) const {
  auto it = embeddings_.find(image_id);
  return it == embeddings_.end() ? nullptr : &it->second;
}

void AssetStore::add_caption(std::string image_id, std::string caption) {
  captions_.insert_or_assign(std::move(image_id), std::move(caption));
}

void AssetStore::add_embedding(const std::string& image_id, Embedding vector) {
  if (!embedding_dim_) embedding_dim_ = vector.size();
  if (vector.size() != *embedding_dim_)
    throw LoadError("embedding dimension mismatch for '" + image_id + "' (" +
                    std::to_string(vector.size()) + " vs " +
                    std::to_string(*embedding_dim_) + ")");
  embeddings_.insert_or_assign(image_id, normalize_embedding(std::move(vector), image_id));
}

namespace {

void read_embeddings_file(const fs::path& path, AssetStore& store) {
  std::optional<std::string> model_tag;
  jsonl::for_each_record(path, [&](const json& rec, std::size_t line) {
    const std::string id = jsonl::require_string(rec, "image_id", path, line);
    if (!rec.contains("vector") || !rec["vector"].is_array())
      throw LoadError(jsonl::where(path, line) + ": missing 'vector' array");
    Embedding v;
    v.reserve(rec["vector"].size());
    for (const auto& x : rec["vector"]) {
      if (!x.is_number())
        throw LoadError(jsonl::where(path, line) + ": non-numeric vector component");
      v.push_back(x.get<float>());
    }
    if (rec.contains("model_tag")) {
      auto tag = rec["model_tag"].get<std::string>();
      if (model_tag && *model_tag != tag)
        throw LoadError(jsonl::where(path, line) + ": model_tag '" + tag +
                        "' differs from '" + *model_tag + "'");
      model_tag = std::move(tag);
    }
    try {
      store.add_embedding(id, std::move(v));
    } catch (const LoadError& e) {
      throw LoadError(jsonl::where(path, line) + ": " + e.what());
    }
  });
}

void read_captions_file(const fs::path& path, AssetStore& store) {
  jsonl::for_each_record(path, [&](const json& rec, std::size_t line) {
    store.add_caption(jsonl::require_string(rec, "image_id", path, line),
                      jsonl::require_string(rec, "caption", path, line));
  });
}

}  // namespace

AssetStore AssetStore::load(const fs::path& assets_dir, bool require_captions) {
  AssetStore store;
  const fs::path embeddings = assets_dir / kEmbeddingsFile;
  const fs::path captions = assets_dir / kCaptionsFile;
  if (!fs::exists(embeddings))
    throw LoadError("missing embedding file: " + embeddings.string());
  read_embeddings_file(embeddings, store);
  if (fs::exists(captions)) {
    read_captions_file(captions, store);
  } else if (require_captions) {
    throw LoadError("missing caption file: " + captions.string());
  }
  return store;
}

AssetStore AssetStore::load_embeddings(const fs::path& assets_dir) {
  return load(assets_dir, /*require_captions=*/false);
}

KnowledgeBase load_knowledge_base(const fs::path& path, const fs::path& assets_dir) {
  std::vector<KnowledgeEntity> entities;
  std::unordered_set<std::string> seen;
  jsonl::for_each_record(path, [&](const json& rec, std::size_t line) {
    KnowledgeEntity e;
    e.entity_id = jsonl::require_string(rec, "entity_id", path, line);
    if (!seen.insert(e.entity_id).second)
      throw LoadError(jsonl::where(path, line) + ": duplicate entity_id: " + e.entity_id);
    e.name = jsonl::require_string(rec, "name", path, line);
    for (const auto& a : jsonl::optional_array(rec, "attributes", path, line)) {
      if (!a.is_object() || !a.contains("key") || !a.contains("value"))
        throw LoadError(jsonl::where(path, line) + ": attribute must be {key, value}");
      e.attributes.push_back({a["key"].get<std::string>(), jsonl::scalar_to_string(a["value"])});
    }
    for (const auto& r : jsonl::optional_array(rec, "reviews", path, line))
      e.reviews.push_back(r.get<std::string>());
    for (const auto& id : jsonl::optional_array(rec, "image_ids", path, line))
      e.image_ids.push_back(id.get<std::string>());
    entities.push_back(std::move(e));
  });

  bool any_images = false;
  for (const auto& e : entities) any_images = any_images || !e.image_ids.empty();
  if (any_images) {
    const AssetStore assets = AssetStore::load_embeddings(assets_dir);
    for (auto& e : entities) {
      for (const auto& id : e.image_ids) {
        const Embedding* v = assets.embedding(id);
        if (v == nullptr)
          throw LoadError(entity_label(e) + ": missing embedding for image " + id);
        e.image_embeddings.push_back(*v);
      }
    }
  }
  KnowledgeBase kb(std::move(entities));
  for (const auto& w : kb.warnings()) std::cerr << "warning: " << w << "\n";
  return kb;
}

void write_knowledge_base(const KnowledgeBase& kb, const fs::path& path) {
  jsonl::Writer out(path);
  for (const auto& e : kb.entities()) {
    json attributes = json::array();
    for (const auto& a : e.attributes) attributes.push_back({{"key", a.key}, {"value", a.value}});
    out.write({{"entity_id", e.entity_id},
               {"name", e.name},
               {"attributes", std::move(attributes)},
               {"reviews", e.reviews},
               {"image_ids", e.image_ids}});
  }
}

void write_embeddings(const std::vector<std::pair<std::string, Embedding>>& records,
                      const fs::path& path) {
  jsonl::Writer out(path);
  for (const auto& [id, v] : records) out.write({{"image_id", id}, {"vector", v}});
}

void write_captions(const std::vector<std::pair<std::string, std::string>>& records,
                    const fs::path& path) {
  jsonl::Writer out(path);
  for (const auto& [id, c] : records) out.write({{"image_id", id}, {"caption", c}});
}

std::string merge_text(const std::vector<Utterance>& utterances) {
  std::string out;
  for (const auto& u : utterances) {
    if (u.text.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(u.text);
  }
  return out;
}

DialogContext make_context(std::string dialog_id, int turn_index,
                           std::vector<Utterance> window,
                           std::optional<std::string> ground_truth) {
  DialogContext ctx;
  ctx.dialog_id = std::move(dialog_id);
  ctx.turn_index = turn_index;
  ctx.utterances = std::move(window);
  ctx.merged_text = merge_text(ctx.utterances);
  for (const auto& u : ctx.utterances)
    ctx.image_refs.insert(ctx.image_refs.end(), u.image_refs.begin(), u.image_refs.end());
  ctx.ground_truth = std::move(ground_truth);
  return ctx;
}

ContextBuildResult build_contexts(const fs::path& dialogs_path, int window_turns) {
  if (window_turns < 1) throw PreconditionError("window_turns must be >= 1");
  ContextBuildResult result;
  jsonl::for_each_record(dialogs_path, [&](const json& rec, std::size_t line) {
    const std::string dialog_id = jsonl::require_string(rec, "dialog_id", dialogs_path, line);
    if (!rec.contains("turns") || !rec["turns"].is_array())
      throw LoadError(jsonl::where(dialogs_path, line) + ": missing 'turns' array");
    ++result.dialog_count;

    std::vector<Utterance> turns;
    for (const auto& t : rec["turns"]) {
      Utterance u;
      try {
        u.speaker = parse_speaker(t.at("speaker").get<std::string>());
        u.text = t.value("text", std::string());
        for (const auto& id : t.value("image_refs", json::array()))
          u.image_refs.push_back(id.get<std::string>());
      } catch (const json::exception& e) {
        throw LoadError(jsonl::where(dialogs_path, line) + ": malformed turn: " + e.what());
      } catch (const LoadError& e) {
        throw LoadError(jsonl::where(dialogs_path, line) + ": " + e.what());
      }
      if (text::trim(u.text).empty() && u.image_refs.empty())
        throw LoadError(jsonl::where(dialogs_path, line) +
                        ": turn with neither text nor images");
      u.turn_index = static_cast<int>(turns.size());
      turns.push_back(std::move(u));
    }

    bool has_agent = false;
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (turns[i].speaker != Speaker::kAgent) continue;
      has_agent = true;
      const std::size_t begin = i > static_cast<std::size_t>(window_turns) ? i - window_turns : 0;
      std::vector<Utterance> window(turns.begin() + static_cast<std::ptrdiff_t>(begin),
                                    turns.begin() + static_cast<std::ptrdiff_t>(i));
      result.contexts.push_back(
          make_context(dialog_id, static_cast<int>(i), std::move(window), turns[i].text));
    }
    if (!has_agent)
      result.warnings.push_back(jsonl::where(dialogs_path, line) + ": dialog '" +
                                dialog_id + "' has no agent utterance, skipped");
  });
  return result;
}

DialogContext attach_assets(DialogContext context, const AssetStore& assets) {
  context.captions.clear();
  context.image_embeddings.clear();
  for (const auto& id : context.image_refs) {
    const std::string* caption = assets.caption(id);
    const Embedding* embedding = assets.embedding(id);
    if (caption == nullptr || embedding == nullptr) throw AssetError(id);
    context.captions.push_back(*caption);
    context.image_embeddings.push_back(*embedding);
  }
  return context;
}

DialogContext attach_assets(DialogContext context, const fs::path& assets_dir) {
  if (context.image_refs.empty()) return context;
  return attach_assets(std::move(context), AssetStore::load(assets_dir));
}

}  // namespace dualknow
