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

#include <string>
#include <string_view>
#include <vector>

namespace dualknow::text {

std::string to_lower(std::string_view s);

/// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

/// Trims and replaces every internal whitespace run with one space.
std::string collapse_whitespace(std::string_view s);

/// Lowercase, trim, collapse internal whitespace, then strip leading and
/// trailing ASCII punctuation. Used for the knowledge base name index and
/// for textual entity matching.
std::string normalize_name(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Splits on `sep`, trimming each piece and dropping empty pieces.
std::vector<std::string> split_trimmed(std::string_view s, char sep);

bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Shortens `s` to at most `max_chars` bytes, cutting at the last whitespace
/// boundary inside the limit when one exists. Never splits a UTF-8 sequence.
std::string truncate_at_whitespace(std::string_view s, std::size_t max_chars);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fingerprint(std::string_view s);

}  // namespace dualknow::text
