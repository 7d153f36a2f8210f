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

#include "dualknow/prompts.hpp"

#include "dualknow/text.hpp"

namespace dualknow::prompts {

std::string quoted(std::string_view text) {
  std::string out = "``";
  out.append(text);
  out.append("''");
  return out;
}

std::string caption_text(const DialogContext& context) {
  return text::join(context.captions, " ");
}

std::string context_block(const DialogContext& context) {
  std::string out = "{The textual context: " + prompts::quoted(context.merged_text);
  if (context.has_images()) out += "; The caption of visual context: " + prompts::quoted(caption_text(context));
  out += ".}";
  return out;
}

std::string full_prompt(std::string_view system_text, std::string_view user_text) {
  std::string out(system_text);
  out.push_back('\n');
  out.append(user_text);
  return out;
}

}  // namespace dualknow::prompts
