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
#include <span>
#include <string>
#include <vector>

#include "dualknow/corpus.hpp"
#include "dualknow/gateway.hpp"
#include "dualknow/probe_filter.hpp"

namespace dualknow {

enum class ClueParse { kClean, kPartial };
std::string_view to_string(ClueParse status);

/// The user's need and 3-5 keywords summarized from the context alone.
struct KeyClues {
  std::string need;
  std::vector<std::string> keywords;
  std::string raw_text;
  ClueParse parse_status = ClueParse::kPartial;

  bool empty() const { return need.empty() && keywords.empty(); }

  friend bool operator==(const KeyClues&, const KeyClues&) = default;
};

struct ReasonerOptions {
  std::string request_prefix;
  double temperature = 0.0;
  int clue_max_new_tokens = 256;
  int response_max_new_tokens = 256;
};

/// Parses "need: ..." and "keywords: a, b, c" (same line or separate lines).
/// Clean requires a non-empty need and 3 to 5 keywords.
KeyClues parse_key_clues(std::string_view reply);

/// Never sees retrieved knowledge; one <image> placeholder per context image.
RenderedPrompt render_clue_prompt(const DialogContext& context);

/// Sends the clue prompt, with the context's image ids, to the clue
/// extractor. Gateway errors propagate.
KeyClues extract_key_clues(const DialogContext& context, Gateway& gateway,
                           const ReasonerOptions& options = {});

/// "need: ... keywords: a, b, c", or empty for empty clues.
std::string render_clue_block(const KeyClues& clues);

RenderedPrompt render_response_prompt(const DialogContext& context, const KeyClues& clues,
                                      const FusedKnowledge& fused);

struct GenerationRecord {
  std::string dialog_id;
  int turn_index = 0;
  std::string response;
  KeyClues clues;
  FusedKind fused_kind = FusedKind::kNone;
  std::string prompt_text;
  std::optional<std::string> ground_truth;
};

/// One generator call; the reply is trimmed. Throws EmptyOutputError when
/// nothing remains.
GenerationRecord generate_response(const DialogContext& context, const KeyClues& clues,
                                   const FusedKnowledge& fused, Gateway& gateway,
                                   const ReasonerOptions& options = {});

struct SftSample {
  DialogContext context;
  KeyClues clues;
  FusedKnowledge fused;
};

struct SftRecord {
  std::string system;
  std::string user;
  std::string assistant;

  friend bool operator==(const SftRecord&, const SftRecord&) = default;
};

SftRecord make_sft_record(const SftSample& sample);

/// Writes one {system, user, assistant} line per sample, in order. Throws
/// PreconditionError naming the sample when a ground truth is missing; the
/// output file is not created in that case.
std::size_t export_sft_dataset(std::span<const SftSample> samples,
                               const std::filesystem::path& out_path);

std::vector<SftRecord> read_sft_dataset(const std::filesystem::path& path);

}  // namespace dualknow
