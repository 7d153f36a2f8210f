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

#include <optional>
#include <string>
#include <string_view>

#include "dualknow/corpus.hpp"
#include "dualknow/error.hpp"
#include "dualknow/gateway.hpp"
#include "dualknow/retrieval.hpp"

namespace dualknow {

enum class KnowledgeType { kAttribute, kReview };
std::string_view to_string(KnowledgeType type);

/// A prompt split into its fixed instruction and its per-sample slots.
struct RenderedPrompt {
  std::string system_text;
  std::string user_text;

  std::string full() const;
};

/// Raised when a probe is requested for a knowledge type with no text.
class EmptyKnowledgeError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct ProbeResult {
  KnowledgeType knowledge_type = KnowledgeType::kAttribute;
  std::string probe_response;
  std::string prompt_text;
};

enum class Judgment { kYes, kNo };
enum class VerdictParse { kClean, kDefaulted };

std::string_view to_string(Judgment judgment);
std::string_view to_string(VerdictParse status);

struct UtilityVerdict {
  Judgment judgment = Judgment::kNo;
  std::string evidence;
  std::string raw_text;
  VerdictParse parse_status = VerdictParse::kDefaulted;

  friend bool operator==(const UtilityVerdict&, const UtilityVerdict&) = default;
};

enum class FusedKind { kAttributeOnly, kReviewOnly, kBoth, kNone };
std::string_view to_string(FusedKind kind);

struct FusedKnowledge {
  FusedKind kind = FusedKind::kNone;
  std::string text;
  /// Absent when the knowledge type filter was bypassed.
  std::optional<UtilityVerdict> attribute_verdict;
  std::optional<UtilityVerdict> review_verdict;
};

inline constexpr std::string_view kAttributeSectionLabel = "Attribute knowledge: ";
inline constexpr std::string_view kReviewSectionLabel = " Review knowledge: ";

struct ProbeOptions {
  /// Prefix for request ids, e.g. "dialog_7/3".
  std::string request_prefix;
  double temperature = 0.0;
  int probe_max_new_tokens = 256;
  int judge_max_new_tokens = 512;
};

/// Probe prompt for one knowledge type. Throws EmptyKnowledgeError when that
/// type's knowledge text is empty.
RenderedPrompt render_probe_prompt(const DialogContext& context, const DualKnowledge& knowledge,
                                   KnowledgeType type);

RenderedPrompt render_judge_prompt(const DialogContext& context, std::string_view knowledge_text,
                                   std::string_view probe_response);

/// Outcome of one probe: a result, a gateway error, or nothing because the
/// type had no knowledge.
struct ProbeOutcome {
  std::optional<ProbeResult> result;
  std::optional<std::string> error;

  bool skipped() const { return !result && !error; }
};

struct ProbePair {
  ProbeOutcome attribute;
  ProbeOutcome review;
};

/// Issues the attribute and review probes concurrently. A failure of one
/// type is recorded in its outcome and does not affect the other.
ProbePair generate_probes(const DialogContext& context, const DualKnowledge& knowledge,
                          Gateway& gateway, const ProbeOptions& options = {});

/// First alphabetic token decides: "yes" or "no" (any case) parse cleanly,
/// anything else is a defaulted no.
UtilityVerdict parse_verdict(std::string_view reply);

/// A defaulted no carrying `reason` as evidence.
UtilityVerdict defaulted_no(std::string reason);

/// Asks the judge whether `knowledge_text` contributed to the probe. Gateway
/// failures produce a defaulted no (fail-closed).
UtilityVerdict assess_utility(const DialogContext& context, std::string_view knowledge_text,
                              const ProbeResult& probe, Gateway& gateway,
                              const ProbeOptions& options = {});

/// Keeps each knowledge type whose verdict is yes. A type with empty text is
/// never kept.
FusedKnowledge fuse(const UtilityVerdict& attribute, const UtilityVerdict& review,
                    const DualKnowledge& knowledge);

/// All retrieved knowledge, without filtering.
FusedKnowledge unfiltered(const DualKnowledge& knowledge);

}  // namespace dualknow
