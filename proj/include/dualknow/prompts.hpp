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

// Fixed instruction text of the four prompt templates. Slot text is rendered
// by probe_filter and reasoner; quoting uses the `` '' pairs of the original
// templates.

#include <string>
#include <string_view>

#include "dualknow/corpus.hpp"

namespace dualknow::prompts {

inline constexpr std::string_view kProbeInstruction =
    "You are a helpful assistant. Based on the given context, you can generate responses with "
    "the help of external knowledge. You should only provide the correct response without "
    "repeating the context and instruction.";

inline constexpr std::string_view kJudgeInstruction =
    "You are a knowledge evaluator that can judge if the external knowledge is useful for "
    "responding the context. Given a retrieved knowledge, a context, and a response (referred to "
    "as the LLM response) generated by an LLM that integrates the retrieved knowledge, you should "
    "determine whether the knowledge provides specific information that directly contributes to "
    "the LLM response generation; If the information in the knowledge does not help the LLM "
    "response generation, you should point it out with evidence. You should respond with "
    "``Yes'' or ``No'' with evidence of your judgment, where ``No'' signifies that the knowledge "
    "is not useful.";

inline constexpr std::string_view kClueInstruction =
    "You are a helpful assistant. Please extract the user need and three-to-five keywords based "
    "on the following information.";

inline constexpr std::string_view kResponseInstruction =
    "You are a helpful assistant. Please think and generate the response based on the given "
    "context, the pre-extracted context key clues, and related knowledge. Please prioritize using "
    "related knowledge to generate responses. If unable to answer, maintain critical thinking and "
    "use your own knowledge to generate responses. Furthermore, please do not rely solely on the "
    "pre-extracted context key clues, as the provided context key clues may not always be "
    "effective.";

inline constexpr std::string_view kImagePlaceholder = "<image>";

/// ``text''
std::string quoted(std::string_view text);

/// Captions of all context images joined by single spaces.
std::string caption_text(const DialogContext& context);

/// {The textual context: ``...''; The caption of visual context: ``...''.}
/// The caption clause is omitted when the context has no images.
std::string context_block(const DialogContext& context);

/// Instruction and slots as sent to a model: system text, newline, user text.
std::string full_prompt(std::string_view system_text, std::string_view user_text);

}  // namespace dualknow::prompts
