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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "dualknow/corpus.hpp"
#include "dualknow/error.hpp"
#include "oracles/retrieval_oracle.hpp"
#include "support.hpp"

namespace dualknow {
namespace {

using json = nlohmann::json;
using testing::TempDir;
using testing::write_file;

std::string dialog_line(const std::string& id, const json& turns) {
  return json{{"dialog_id", id}, {"turns", turns}}.dump() + "\n";
}

json turn(const std::string& speaker, const std::string& text, json images = json::array()) {
  return {{"speaker", speaker}, {"text", text}, {"image_refs", std::move(images)}};
}

TEST(LoadKnowledgeBase, FixtureCorpus) {
  const auto dir = testing::corpus_dir();
  KnowledgeBase kb = load_knowledge_base(dir / "kb.jsonl", dir / "assets");
  EXPECT_EQ(kb.size(), 20u);
  ASSERT_TRUE(kb.embedding_dim().has_value());
  EXPECT_EQ(*kb.embedding_dim(), 32u);
  for (const auto& e : kb.entities())
    for (const auto& v : e.image_embeddings) {
      double n = 0;
      for (float x : v) n += static_cast<double>(x) * x;
      EXPECT_NEAR(std::sqrt(n), 1.0, 1e-4);
    }
  ASSERT_TRUE(kb.find_by_name("WINGSTOP").has_value());
  EXPECT_EQ(kb.entities()[*kb.find_by_name("wingstop")].name, "Wingstop");
}

TEST(LoadKnowledgeBase, DuplicateIdNamesTheId) {
  TempDir tmp;
  write_file(tmp / "kb.jsonl",
             R"({"entity_id":"venue_1","name":"A","attributes":[{"key":"k","value":"v"}]})"
             "\n"
             R"({"entity_id":"venue_1","name":"B","reviews":["ok"]})"
             "\n");
  try {
    load_knowledge_base(tmp / "kb.jsonl", tmp.path());
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("venue_1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
}

TEST(LoadKnowledgeBase, EmptyFileGivesEmptyBase) {
  TempDir tmp;
  write_file(tmp / "kb.jsonl", "");
  KnowledgeBase kb = load_knowledge_base(tmp / "kb.jsonl", tmp.path());
  EXPECT_TRUE(kb.empty());
  EXPECT_FALSE(kb.embedding_dim().has_value());
}

TEST(LoadKnowledgeBase, MissingEmbeddingFileIsAnError) {
  TempDir tmp;
  write_file(tmp / "kb.jsonl", R"({"entity_id":"a","name":"A","image_ids":["x"]})" "\n");
  EXPECT_THROW(load_knowledge_base(tmp / "kb.jsonl", tmp.path()), LoadError);
}

TEST(LoadKnowledgeBase, MissingEmbeddingRecordIsAnError) {
  TempDir tmp;
  write_file(tmp / "kb.jsonl", R"({"entity_id":"a","name":"A","image_ids":["x","y"]})" "\n");
  write_embeddings({{"x", {1.0f, 0.0f}}}, tmp / "embeddings.jsonl");
  EXPECT_THROW(load_knowledge_base(tmp / "kb.jsonl", tmp.path()), LoadError);
}

TEST(LoadKnowledgeBase, DimensionMismatchIsAnError) {
  TempDir tmp;
  write_file(tmp / "kb.jsonl",
             R"({"entity_id":"a","name":"A","image_ids":["x"]})" "\n"
             R"({"entity_id":"b","name":"B","image_ids":["y"]})" "\n");
  write_file(tmp / "embeddings.jsonl",
             R"({"image_id":"x","vector":[1.0,0.0]})" "\n"
             R"({"image_id":"y","vector":[1.0,0.0,0.0]})" "\n");
  EXPECT_THROW(load_knowledge_base(tmp / "kb.jsonl", tmp.path()), LoadError);
}

TEST(LoadKnowledgeBase, MalformedLineReportsLineNumber) {
  TempDir tmp;
  write_file(tmp / "kb.jsonl", R"({"entity_id":"a","name":"A"})" "\n{not json\n");
  try {
    load_knowledge_base(tmp / "kb.jsonl", tmp.path());
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST(LoadKnowledgeBase, EntityWithoutKnowledgeWarns) {
  KnowledgeBase kb({KnowledgeEntity{"a", "A", {}, {}, {}, {}}});
  ASSERT_EQ(kb.warnings().size(), 1u);
  EXPECT_NE(kb.warnings()[0].find("'a'"), std::string::npos);
}

TEST(LoadKnowledgeBase, ModelTagMustBeSingle) {
  TempDir tmp;
  write_file(tmp / "embeddings.jsonl",
             R"({"image_id":"x","vector":[1.0,0.0],"model_tag":"clip-a"})" "\n"
             R"({"image_id":"y","vector":[0.0,1.0],"model_tag":"clip-b"})" "\n");
  EXPECT_THROW(AssetStore::load_embeddings(tmp.path()), LoadError);
}

TEST(NormPolicy, RenormalizesSmallDeviation) {
  Embedding v = normalize_embedding({0.6f * 1.005f, 0.8f * 1.005f}, "x");
  EXPECT_NEAR(std::hypot(v[0], v[1]), 1.0, 1e-6);
  EXPECT_NEAR(v[0], 0.6f, 1e-6);
}

TEST(NormPolicy, RejectsLargeDeviation) {
  EXPECT_THROW(normalize_embedding({0.6f * 1.02f, 0.8f * 1.02f}, "x"), LoadError);
  EXPECT_THROW(normalize_embedding({0.0f, 0.0f}, "x"), LoadError);
  EXPECT_THROW(normalize_embedding({}, "x"), LoadError);
}

TEST(KnowledgeBaseStats, AggregatesMatchInput) {
  // 1,771 entities averaging 13.7 attributes, 24.2 reviews, 64.3 images.
  constexpr std::size_t kEntities = 1771;
  auto spread = [](double mean, std::size_t i) {
    const auto total = static_cast<std::size_t>(std::llround(mean * kEntities));
    return total / kEntities + (i < total % kEntities ? 1 : 0);
  };
  std::vector<KnowledgeEntity> entities;
  for (std::size_t i = 0; i < kEntities; ++i) {
    KnowledgeEntity e;
    e.entity_id = "venue_" + std::to_string(i);
    e.name = e.entity_id;
    e.attributes.assign(spread(13.7, i), Attribute{"k", "v"});
    e.reviews.assign(spread(24.2, i), "good");
    for (std::size_t j = 0; j < spread(64.3, i); ++j) {
      e.image_ids.push_back(e.entity_id + "_" + std::to_string(j));
      e.image_embeddings.push_back({1.0f, 0.0f});
    }
    entities.push_back(std::move(e));
  }
  KnowledgeBase kb(std::move(entities));
  const KnowledgeBaseStats s = kb.stats();
  EXPECT_EQ(s.entity_count, 1771u);
  EXPECT_NEAR(s.mean_attributes, 13.7, 1e-3);
  EXPECT_NEAR(s.mean_reviews, 24.2, 1e-3);
  EXPECT_NEAR(s.mean_images, 64.3, 1e-3);
}

TEST(KnowledgeBaseRoundTrip, WriteThenReloadIsEqual) {
  TempDir tmp;
  std::mt19937_64 rng(7);
  KnowledgeBase kb = oracle::synthetic_kb(rng, 12, 3, 16);
  std::vector<std::pair<std::string, Embedding>> vectors;
  for (const auto& e : kb.entities())
    for (std::size_t i = 0; i < e.image_ids.size(); ++i)
      vectors.emplace_back(e.image_ids[i], e.image_embeddings[i]);
  write_knowledge_base(kb, tmp / "kb.jsonl");
  write_embeddings(vectors, tmp / "embeddings.jsonl");
  KnowledgeBase again = load_knowledge_base(tmp / "kb.jsonl", tmp.path());
  EXPECT_EQ(again, kb);

  write_knowledge_base(again, tmp / "kb2.jsonl");
  EXPECT_EQ(testing::read_file(tmp / "kb.jsonl"), testing::read_file(tmp / "kb2.jsonl"));
}

TEST(BuildContexts, TwoTurnDialogTruncatesAtStart) {
  TempDir tmp;
  write_file(tmp / "d.jsonl", dialog_line("d", {turn("user", "u1"), turn("agent", "u2")}));
  auto built = build_contexts(tmp / "d.jsonl", 2);
  ASSERT_EQ(built.contexts.size(), 1u);
  const DialogContext& c = built.contexts[0];
  ASSERT_EQ(c.utterances.size(), 1u);
  EXPECT_EQ(c.merged_text, "u1");
  EXPECT_EQ(c.ground_truth, "u2");
  EXPECT_EQ(c.turn_index, 1);
}

TEST(BuildContexts, FiveTurnHandTrace) {
  // u4 (index 3) is the agent: window is {u2, u3}.
  TempDir tmp;
  write_file(tmp / "d.jsonl",
             dialog_line("d", {turn("user", "one"), turn("user", "two"), turn("user", "three"),
                               turn("agent", "four"), turn("user", "five")}));
  auto built = build_contexts(tmp / "d.jsonl", 2);
  ASSERT_EQ(built.contexts.size(), 1u);
  const DialogContext& c = built.contexts[0];
  ASSERT_EQ(c.utterances.size(), 2u);
  EXPECT_EQ(c.utterances[0].text, "two");
  EXPECT_EQ(c.utterances[1].text, "three");
  EXPECT_EQ(c.merged_text, "two three");
  EXPECT_EQ(c.ground_truth, "four");
  EXPECT_EQ(c.turn_index, 3);
}

TEST(BuildContexts, OneSamplePerAgentTurnInFileOrder) {
  TempDir tmp;
  write_file(tmp / "d.jsonl",
             dialog_line("a", {turn("agent", "hi"), turn("user", "x"), turn("system", "y")}) +
                 dialog_line("b", json::array({turn("user", "only user")})) +
                 dialog_line("c", {turn("user", "p"), turn("agent", "q")}));
  auto built = build_contexts(tmp / "d.jsonl", 2);
  ASSERT_EQ(built.contexts.size(), 3u);
  EXPECT_EQ(built.contexts[0].dialog_id, "a");
  EXPECT_EQ(built.contexts[0].turn_index, 0);
  EXPECT_TRUE(built.contexts[0].utterances.empty());
  EXPECT_EQ(built.contexts[1].turn_index, 2);
  EXPECT_EQ(built.contexts[2].dialog_id, "c");
  ASSERT_EQ(built.warnings.size(), 1u);
  EXPECT_NE(built.warnings[0].find("'b'"), std::string::npos);
  EXPECT_EQ(built.dialog_count, 3u);
}

TEST(BuildContexts, ImagesAggregateInWindowOrder) {
  TempDir tmp;
  write_file(tmp / "d.jsonl",
             dialog_line("d", {turn("user", "a", {"i0"}), turn("agent", "", {"i1", "i2"}),
                               turn("user", "b", {"i3"}), turn("agent", "c")}));
  auto built = build_contexts(tmp / "d.jsonl", 2);
  ASSERT_EQ(built.contexts.size(), 2u);
  EXPECT_EQ(built.contexts[1].image_refs, (std::vector<std::string>{"i1", "i2", "i3"}));
  EXPECT_EQ(built.contexts[1].merged_text, "b");
}

TEST(BuildContexts, Errors) {
  TempDir tmp;
  write_file(tmp / "bad.jsonl", dialog_line("d", json::array({turn("user", "a")})) + "{\"dialog_id\":1}\n");
  EXPECT_THROW(build_contexts(tmp / "bad.jsonl", 2), LoadError);
  write_file(tmp / "empty_turn.jsonl", dialog_line("d", {turn("user", "  "), turn("agent", "b")}));
  EXPECT_THROW(build_contexts(tmp / "empty_turn.jsonl", 2), LoadError);
  write_file(tmp / "speaker.jsonl", dialog_line("d", json::array({turn("bot", "a"), turn("agent", "b")})));
  try {
    build_contexts(tmp / "speaker.jsonl", 2);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("bot"), std::string::npos) << e.what();
  }
  write_file(tmp / "ok.jsonl", dialog_line("d", {turn("user", "a"), turn("agent", "b")}));
  EXPECT_THROW(build_contexts(tmp / "ok.jsonl", 0), PreconditionError);
}

TEST(BuildContexts, WindowInvariantsOnFixtureCorpus) {
  for (int window : {1, 2, 3, 5}) {
    auto built = build_contexts(testing::corpus_dir() / "dialogs_50.jsonl", window);
    ASSERT_EQ(built.contexts.size(), 50u);
    for (const auto& c : built.contexts) {
      EXPECT_LE(c.utterances.size(), static_cast<std::size_t>(window));
      for (const auto& u : c.utterances) EXPECT_LT(u.turn_index, c.turn_index);
      EXPECT_EQ(merge_text(c.utterances), c.merged_text);
      std::vector<std::string> images;
      for (const auto& u : c.utterances)
        images.insert(images.end(), u.image_refs.begin(), u.image_refs.end());
      EXPECT_EQ(images, c.image_refs);
    }
  }
}

TEST(AttachAssets, AlignsCaptionsAndEmbeddings) {
  AssetStore store;
  store.add_caption("img_a", "a cup");
  store.add_caption("img_b", "a bowl");
  store.add_embedding("img_a", {1.0f, 0.0f});
  store.add_embedding("img_b", {0.0f, 1.0f});
  DialogContext c = make_context("d", 1, {{Speaker::kUser, "x", {"img_b", "img_a"}, 0}}, "y");
  DialogContext out = attach_assets(c, store);
  EXPECT_EQ(out.captions, (std::vector<std::string>{"a bowl", "a cup"}));
  ASSERT_EQ(out.image_embeddings.size(), 2u);
  EXPECT_EQ(out.image_embeddings[0], (Embedding{0.0f, 1.0f}));
}

TEST(AttachAssets, NoImagesReturnsUnchangedWithoutReading) {
  DialogContext c = make_context("d", 1, {{Speaker::kUser, "x", {}, 0}}, "y");
  // The directory does not exist; any read would throw.
  EXPECT_EQ(attach_assets(c, std::filesystem::path("/nonexistent/assets")), c);
}

TEST(AttachAssets, MissingCaptionNamesImage) {
  TempDir tmp;
  write_embeddings({{"img_a", {1.0f, 0.0f}}, {"img_b", {0.0f, 1.0f}}}, tmp / "embeddings.jsonl");
  write_captions({{"img_a", "a cup"}}, tmp / "captions.jsonl");
  DialogContext c = make_context("d", 1, {{Speaker::kUser, "x", {"img_a", "img_b"}, 0}}, "y");
  try {
    attach_assets(c, tmp.path());
    FAIL();
  } catch (const AssetError& e) {
    EXPECT_STREQ(e.what(), "missing asset: img_b");
  }
}

}  // namespace
}  // namespace dualknow
