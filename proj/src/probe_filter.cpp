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

#include "dualknow/probe_filter.hpp"

#include <cctype>
#include <future>

#include "dualknow/prompts.hpp"
#include "dualknow/text.hpp"

namespace dualknow {

std::string_view to_string(KnowledgeType type) {
  return type == KnowledgeType::kAttribute ? "attribute" : "review";
}

std::string_view to_string(Judgment judgment) {
  return judgment == Judgment::kYes ? "yes" : "no";
}

std::string_view to_string(VerdictParse status) {
  return status == VerdictParse::kClean ? "clean" : "defaulted";
}

std::string_view to_string(FusedKind kind) {
  switch (kind) {
    case FusedKind::kAttributeOnly:
      return "attribute_only";
    case FusedKind::kReviewOnly:
      return "review_only";
    case FusedKind::kBoth:
      return "both";
    case FusedKind::kNone:
      return "none";
  }
  return "none";
}

std::string RenderedPrompt::full() const { return prompts::full_prompt(system_text, user_text); }

namespace {

const std::string& knowledge_text(const DualKnowledge& knowledge, KnowledgeType type) {
  return type == KnowledgeType::kAttribute ? knowledge.attribute_text : knowledge.review_text;
}

ProbeOutcome run_probe(const DialogContext& context, const DualKnowledge& knowledge,
                       KnowledgeType type, Gateway& gateway, const ProbeOptions& options) {
  ProbeOutcome outcome;
  if (knowledge_text(knowledge, type).empty()) return outcome;
  try {
    RenderedPrompt prompt = render_probe_prompt(context, knowledge, type);
    ChatRequest request;
    request.endpoint = Endpoint::kJudge;
    request.system_text = prompt.system_text;
    request.user_text = prompt.user_text;
    request.temperature = options.temperature;
    request.max_new_tokens = options.probe_max_new_tokens;
    request.request_id = options.request_prefix + "/probe." + std::string(to_string(type));
    ChatResponse response = gateway.complete(request);
    outcome.result = ProbeResult{type, std::string(text::trim(response.text)), prompt.full()};
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

// Dashes commonly separating the verdict word from its justification.
std::string_view strip_separators(std::string_view s) {
  while (!s.empty()) {
    const auto c = static_cast<unsigned char>(s.front());
    if (std::isspace(c) || std::ispunct(c)) {
      s.remove_prefix(1);
    } else if (s.starts_with("\xE2\x80\x94") || s.starts_with("\xE2\x80\x93")) {
      s.remove_prefix(3);
    } else {
      break;
    }
  }
  return text::trim(s);
}

}  // namespace

RenderedPrompt render_probe_prompt(const DialogContext& context, const DualKnowledge& knowledge,
                                   KnowledgeType type) {
  const std::string& k = knowledge_text(knowledge, type);
  if (k.empty())
    throw EmptyKnowledgeError("no " + std::string(to_string(type)) + " knowledge to probe with");
  RenderedPrompt prompt;
  prompt.system_text = std::string(prompts::kProbeInstruction);
  prompt.user_text = "Context: " + prompts::context_block(context) + " The external " +
                     std::string(to_string(type)) + " knowledge: " + prompts::quoted(k);
  return prompt;
}

RenderedPrompt render_judge_prompt(const DialogContext& context, std::string_view knowledge_text,
                                   std::string_view probe_response) {
  RenderedPrompt prompt;
  prompt.system_text = std::string(prompts::kJudgeInstruction);
  prompt.user_text = "The retrieved knowledge: " + prompts::quoted(knowledge_text) +
                     ". Context: " + prompts::context_block(context) +
                     " The LLM response: " + prompts::quoted(probe_response);
  return prompt;
}

ProbePair generate_probes(const DialogContext& context, const DualKnowledge& knowledge,
                          Gateway& gateway, const ProbeOptions& options) {
  ProbePair pair;
  const bool both = !knowledge.attribute_text.empty() && !knowledge.review_text.empty();
  if (both) {
    auto review = std::async(std::launch::async, [&] {
      return run_probe(context, knowledge, KnowledgeType::kReview, gateway, options);
    });
    pair.attribute = run_probe(context, knowledge, KnowledgeType::kAttribute, gateway, options);
    pair.review = review.get();
  } else {
    pair.attribute = run_probe(context, knowledge, KnowledgeType::kAttribute, gateway, options);
    pair.review = run_probe(context, knowledge, KnowledgeType::kReview, gateway, options);
  }
  return pair;
}

UtilityVerdict parse_verdict(std::string_view reply) {
  UtilityVerdict verdict;
  verdict.raw_text = std::string(reply);
  std::size_t begin = 0;
  while (begin < reply.size() && !std::isalpha(static_cast<unsigned char>(reply[begin]))) ++begin;
  std::size_t end = begin;
  while (end < reply.size() && std::isalpha(static_cast<unsigned char>(reply[end]))) ++end;
  const std::string token = text::to_lower(reply.substr(begin, end - begin));
  if (token == "yes" || token == "no") {
    verdict.judgment = token == "yes" ? Judgment::kYes : Judgment::kNo;
    verdict.parse_status = VerdictParse::kClean;
    verdict.evidence = std::string(strip_separators(reply.substr(end)));
  } else {
    verdict.judgment = Judgment::kNo;
    verdict.parse_status = VerdictParse::kDefaulted;
    verdict.evidence = std::string(text::trim(reply));
  }
  return verdict;
}

UtilityVerdict defaulted_no(std::string reason) {
  UtilityVerdict verdict;
  verdict.judgment = Judgment::kNo;
  verdict.parse_status = VerdictParse::kDefaulted;
  verdict.evidence = std::move(reason);
  return verdict;
}

UtilityVerdict assess_utility(const DialogContext& context, std::string_view knowledge_text,
                              const ProbeResult& probe, Gateway& gateway,
                              const ProbeOptions& options) {
  if (probe.probe_response.empty()) throw PreconditionError("empty probe response");
  const RenderedPrompt prompt = render_judge_prompt(context, knowledge_text, probe.probe_response);
  ChatRequest request;
  request.endpoint = Endpoint::kJudge;
  request.system_text = prompt.system_text;
  request.user_text = prompt.user_text;
  request.temperature = options.temperature;
  request.max_new_tokens = options.judge_max_new_tokens;
  request.request_id =
      options.request_prefix + "/judge." + std::string(to_string(probe.knowledge_type));
  try {
    return parse_verdict(gateway.complete(request).text);
  } catch (const Error& e) {
    return defaulted_no(std::string("judge unavailable: ") + e.what());
  }
}

namespace {

FusedKnowledge compose(bool keep_attributes, bool keep_reviews, const DualKnowledge& knowledge) {
  keep_attributes = keep_attributes && !knowledge.attribute_text.empty();
  keep_reviews = keep_reviews && !knowledge.review_text.empty();
  FusedKnowledge fused;
  if (keep_attributes && keep_reviews) {
    fused.kind = FusedKind::kBoth;
    fused.text = std::string(kAttributeSectionLabel) + knowledge.attribute_text +
                 std::string(kReviewSectionLabel) + knowledge.review_text;
  } else if (keep_attributes) {
    fused.kind = FusedKind::kAttributeOnly;
    fused.text = knowledge.attribute_text;
  } else if (keep_reviews) {
    fused.kind = FusedKind::kReviewOnly;
    fused.text = knowledge.review_text;
  }
  return fused;
}

}  // namespace

FusedKnowledge fuse(const UtilityVerdict& attribute, const UtilityVerdict& review,
                    const DualKnowledge& knowledge) {
  FusedKnowledge fused = compose(attribute.judgment == Judgment::kYes,
                                 review.judgment == Judgment::kYes, knowledge);
  fused.attribute_verdict = attribute;
  fused.review_verdict = review;
  return fused;
}

FusedKnowledge unfiltered(const DualKnowledge& knowledge) {
  return compose(true, true, knowledge);
}

}  // namespace dualknow
