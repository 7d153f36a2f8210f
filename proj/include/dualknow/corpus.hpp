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
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dualknow {

/// Image embedding. Stored in single precision; similarity math accumulates
/// in double.
using Embedding = std::vector<float>;

struct Attribute {
  std::string key;
  std::string value;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// One venue of the external knowledge base: structured attributes,
/// free-text reviews and unit-norm image embeddings aligned with image_ids.
struct KnowledgeEntity {
  std::string entity_id;
  std::string name;
  std::vector<Attribute> attributes;
  std::vector<std::string> reviews;
  std::vector<std::string> image_ids;
  std::vector<Embedding> image_embeddings;

  friend bool operator==(const KnowledgeEntity&, const KnowledgeEntity&) = default;
};

struct KnowledgeBaseStats {
  std::size_t entity_count = 0;
  double mean_attributes = 0.0;
  double mean_reviews = 0.0;
  double mean_images = 0.0;
};

/// Immutable after loading; safe to share across threads.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  /// Validates uniqueness and embedding dimensions. Throws LoadError.
  explicit KnowledgeBase(std::vector<KnowledgeEntity> entities);

  const std::vector<KnowledgeEntity>& entities() const { return entities_; }
  std::size_t size() const { return entities_.size(); }
  bool empty() const { return entities_.empty(); }

  /// Undefined (nullopt) until some entity carries an image.
  std::optional<std::size_t> embedding_dim() const { return embedding_dim_; }

  /// Position of the entity in input order, or nullopt.
  std::optional<std::size_t> find(std::string_view entity_id) const;
  std::optional<std::size_t> find_by_name(std::string_view name) const;

  /// normalized name -> entity_id; several entities may share a name, the
  /// first in input order owns the index slot.
  const std::unordered_map<std::string, std::string>& name_index() const {
    return name_index_;
  }

  KnowledgeBaseStats stats() const;

  /// Non-fatal findings from loading (entities with neither attributes nor
  /// reviews).
  const std::vector<std::string>& warnings() const { return warnings_; }

  friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
    return a.entities_ == b.entities_;
  }

 private:
  std::vector<KnowledgeEntity> entities_;
  std::unordered_map<std::string, std::size_t> id_index_;
  std::unordered_map<std::string, std::string> name_index_;
  std::optional<std::size_t> embedding_dim_;
  std::vector<std::string> warnings_;
};

enum class Speaker { kUser, kAgent };

std::string_view to_string(Speaker speaker);

struct Utterance {
  Speaker speaker = Speaker::kUser;
  std::string text;
  std::vector<std::string> image_refs;
  /// Position of the utterance within its dialog.
  int turn_index = 0;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

/// One evaluation sample: a windowed multimodal context and the agent
/// utterance that follows it.
struct DialogContext {
  std::string dialog_id;
  int turn_index = 0;
  std::vector<Utterance> utterances;
  std::string merged_text;
  std::vector<std::string> image_refs;
  std::vector<std::string> captions;
  std::vector<Embedding> image_embeddings;
  std::optional<std::string> ground_truth;

  bool has_images() const { return !image_refs.empty(); }

  friend bool operator==(const DialogContext&, const DialogContext&) = default;
};

/// Joins the non-empty utterance texts with single spaces, in turn order.
std::string merge_text(const std::vector<Utterance>& utterances);

/// Builds a context from an explicit utterance window. Used by the batch
/// loader and by the interactive chat session.
DialogContext make_context(std::string dialog_id, int turn_index,
                           std::vector<Utterance> window,
                           std::optional<std::string> ground_truth);

/// Captions and embeddings for images, read from an assets directory.
class AssetStore {
 public:
  static constexpr const char* kCaptionsFile = "captions.jsonl";
  static constexpr const char* kEmbeddingsFile = "embeddings.jsonl";

  AssetStore() = default;

  /// Reads both asset files. A missing file is a LoadError unless
  /// `require_captions` is false, in which case only embeddings are needed.
  static AssetStore load(const std::filesystem::path& assets_dir,
                         bool require_captions = true);

  /// Embeddings only; for knowledge base loading.
  static AssetStore load_embeddings(const std::filesystem::path& assets_dir);

  const std::string* caption(const std::string& image_id) const;
  const Embedding* embedding(const std::string& image_id) const;

  void add_caption(std::string image_id, std::string caption);
  /// Applies the norm policy (renormalize within 1e-2, reject otherwise).
  void add_embedding(const std::string& image_id, Embedding vector);

  std::optional<std::size_t> embedding_dim() const { return embedding_dim_; }

 private:
  std::unordered_map<std::string, std::string> captions_;
  std::unordered_map<std::string, Embedding> embeddings_;
  std::optional<std::size_t> embedding_dim_;
};

/// Returns `vector` scaled to unit length. Throws LoadError when the norm is
/// more than 1e-2 away from 1.
Embedding normalize_embedding(Embedding vector, std::string_view image_id);

KnowledgeBase load_knowledge_base(const std::filesystem::path& path,
                                  const std::filesystem::path& assets_dir);

/// Writes the knowledge base record file. Embeddings are not part of that
/// file; see write_embeddings.
void write_knowledge_base(const KnowledgeBase& kb,
                          const std::filesystem::path& path);

void write_embeddings(
    const std::vector<std::pair<std::string, Embedding>>& records,
    const std::filesystem::path& path);
void write_captions(
    const std::vector<std::pair<std::string, std::string>>& records,
    const std::filesystem::path& path);

struct ContextBuildResult {
  std::vector<DialogContext> contexts;
  std::size_t dialog_count = 0;
  std::vector<std::string> warnings;
};

inline constexpr int kDefaultWindowTurns = 2;

/// One context per agent utterance, holding the `window_turns` utterances
/// that precede it. Throws LoadError (with line number) on malformed input.
ContextBuildResult build_contexts(const std::filesystem::path& dialogs_path,
                                  int window_turns = kDefaultWindowTurns);

/// Fills captions and embeddings for every referenced image. Throws
/// AssetError naming the first missing id.
DialogContext attach_assets(DialogContext context, const AssetStore& assets);

/// Reads the assets directory only when the context references images.
DialogContext attach_assets(DialogContext context,
                            const std::filesystem::path& assets_dir);

}  // namespace dualknow
