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

#include "dualknow/reasoner.hpp"

#include "dualknow/error.hpp"
#include "dualknow/jsonl.hpp"
#include "dualknow/prompts.hpp"
#include "dualknow/text.hpp"

namespace dualknow {

namespace {

constexpr std::string_view kNeedLabel = "need:";
constexpr std::string_view kKeywordsLabel = "keywords:";
constexpr std::size_t kMinKeywords = 3;
constexpr std::size_t kMaxKeywords = 5;

std::string_view first_line(std::string_view s) {
  s = text::trim(s);
  return text::trim(s.substr(0, s.find('\n')));
}

std::vector<std::string> keyword_list(std::string_view s) {
  auto words = text::split_trimmed(s, ',');
  if (!words.empty() && words.back().ends_with('.')) {
    words.back().pop_back();
    if (words.back().empty()) words.pop_back();
  }
  return words;
}

}  // namespace

std::string_view to_string(ClueParse status) {
  return status == ClueParse::kClean ? "clean" : "partial";
}

KeyClues parse_key_clues(std::string_view reply) {
  KeyClues clues;
  clues.raw_text = std::string(reply);
  const std::string lower = text::to_lower(reply);
  const std::size_t need_at = lower.find(kNeedLabel);
  const std::size_t keywords_at =
      lower.find(kKeywordsLabel, need_at == std::string::npos ? 0 : need_at);

  if (keywords_at != std::string::npos) {
    std::string_view rest = reply.substr(keywords_at + kKeywordsLabel.size());
    clues.keywords = keyword_list(rest.substr(0, rest.find('\n')));
  }
  if (need_at != std::string::npos) {
    const std::size_t start = need_at + kNeedLabel.size();
    std::string_view need = keywords_at != std::string::npos
                                ? reply.substr(start, keywords_at - start)
                                : first_line(reply.substr(start));
    clues.need = text::collapse_whitespace(need);
  } else {
    std::string_view line = first_line(reply);
    if (!text::starts_with_icase(line, kKeywordsLabel)) clues.need = std::string(line);
    if (keywords_at == std::string::npos) {
      std::string_view body = text::trim(reply);
      const std::size_t nl = body.find('\n');
      if (nl != std::string_view::npos) {
        auto words = keyword_list(body.substr(nl + 1));
        if (words.size() > kMaxKeywords) words.resize(kMaxKeywords);
        clues.keywords = std::move(words);
      }
    }
  }

  const bool clean = need_at != std::string::npos && keywords_at != std::string::npos &&
                     !clues.need.empty() && clues.keywords.size() >= kMinKeywords &&
                     clues.keywords.size() <= kMaxKeywords;
  clues.parse_status = clean ? ClueParse::kClean : ClueParse::kPartial;
  return clues;
}

RenderedPrompt render_clue_prompt(const DialogContext& context) {
  std::string body = context.merged_text;
  if (context.has_images()) {
    std::vector<std::string> placeholders(context.image_refs.size(),
                                          std::string(prompts::kImagePlaceholder));
    if (!body.empty()) body.push_back(' ');
    body += "Visual context: " + text::join(placeholders, " ");
  }
  RenderedPrompt prompt;
  prompt.system_text = std::string(prompts::kClueInstruction);
  prompt.user_text = "Textual context: " + prompts::quoted(body);
  return prompt;
}

KeyClues extract_key_clues(const DialogContext& context, Gateway& gateway,
                           const ReasonerOptions& options) {
  const RenderedPrompt prompt = render_clue_prompt(context);
  ChatRequest request;
  request.endpoint = Endpoint::kClueExtractor;
  request.system_text = prompt.system_text;
  request.user_text = prompt.user_text;
  request.image_refs = context.image_refs;
  request.temperature = options.temperature;
  request.max_new_tokens = options.clue_max_new_tokens;
  request.request_id = options.request_prefix + "/clues";
  return parse_key_clues(gateway.complete(request).text);
}

std::string render_clue_block(const KeyClues& clues) {
  if (clues.empty()) return {};
  return "need: " + clues.need + " keywords: " + text::join(clues.keywords, ", ");
}

RenderedPrompt render_response_prompt(const DialogContext& context, const KeyClues& clues,
                                      const FusedKnowledge& fused) {
  std::string user = "The textual context: " + prompts::quoted(context.merged_text);
  if (context.has_images())
    user += " The caption of visual context: " + prompts::quoted(prompts::caption_text(context));
  if (!clues.empty())
    user += " The pre-extracted context elements: " + prompts::quoted(render_clue_block(clues)) + ".";
  if (fused.kind != FusedKind::kNone && !fused.text.empty())
    user += " Context-related knowledge: " + prompts::quoted(fused.text);
  return {std::string(prompts::kResponseInstruction), std::move(user)};
}

GenerationRecord generate_response(const DialogContext& context, const KeyClues& clues,
                                   const FusedKnowledge& fused, Gateway& gateway,
                                   const ReasonerOptions& options) {
  const RenderedPrompt prompt = render_response_prompt(context, clues, fused);
  ChatRequest request;
  request.endpoint = Endpoint::kGenerator;
  request.system_text = prompt.system_text;
  request.user_text = prompt.user_text;
  request.temperature = options.temperature;
  request.max_new_tokens = options.response_max_new_tokens;
  request.request_id = options.request_prefix + "/generate";

  GenerationRecord record;
  record.dialog_id = context.dialog_id;
  record.turn_index = context.turn_index;
  record.response = std::string(text::trim(gateway.complete(request).text));
  if (record.response.empty())
    throw EmptyOutputError("empty response for " + request.request_id);
  record.clues = clues;
  record.fused_kind = fused.kind;
  record.prompt_text = prompt.full();
  record.ground_truth = context.ground_truth;
  return record;
}

SftRecord make_sft_record(const SftSample& sample) {
  if (!sample.context.ground_truth)
    throw PreconditionError("sample " + sample.context.dialog_id + "/" +
                            std::to_string(sample.context.turn_index) + " has no ground truth");
  RenderedPrompt prompt = render_response_prompt(sample.context, sample.clues, sample.fused);
  return {std::move(prompt.system_text), std::move(prompt.user_text), *sample.context.ground_truth};
}

std::size_t export_sft_dataset(std::span<const SftSample> samples,
                               const std::filesystem::path& out_path) {
  std::vector<SftRecord> records;
  records.reserve(samples.size());
  for (const auto& s : samples) records.push_back(make_sft_record(s));
  jsonl::Writer out(out_path);
  for (const auto& r : records)
    out.write({{"system", r.system}, {"user", r.user}, {"assistant", r.assistant}});
  return records.size();
}

std::vector<SftRecord> read_sft_dataset(const std::filesystem::path& path) {
  std::vector<SftRecord> records;
  jsonl::for_each_record(path, [&](const nlohmann::json& rec, std::size_t line) {
    records.push_back({jsonl::require_string(rec, "system", path, line),
                       jsonl::require_string(rec, "user", path, line),
                       jsonl::require_string(rec, "assistant", path, line)});
  });
  return records;
}

}  // namespace dualknow
