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

#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "dualknow/gateway.hpp"

namespace dualknow {

/// One scripted reply. Substring and regex rules are tested against the full
/// prompt (system text, a newline, then user text); fingerprint rules against
/// request_fingerprint(). Regex responses may reference capture groups as
/// $1, $2, ...
struct MockRule {
  enum class Kind { kExactFingerprint, kSubstring, kRegex };

  Kind kind = Kind::kSubstring;
  std::string pattern;
  std::string response;
  /// When set, the rule only applies to this endpoint.
  std::optional<Endpoint> endpoint;
};

/// Deterministic offline backend: complete() is a pure lookup over an
/// ordered rule list, first matching rule wins.
class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(std::vector<MockRule> rules, std::string id = "mock");

  std::string send(const ChatRequest& request, const EndpointConfig& config) override;
  std::string id() const override { return id_; }

  const std::vector<MockRule>& rules() const { return rules_; }

  /// FNV-1a of system_text + user_text.
  static std::string request_fingerprint(const ChatRequest& request);
  static std::string full_prompt(const ChatRequest& request);

 private:
  std::vector<MockRule> rules_;
  std::vector<std::optional<std::regex>> compiled_;
  std::string id_;
};

/// Reads a line-delimited script of
/// {"match": {"kind": ..., "pattern": ...}, "response": ..., "endpoint"?: ...}.
/// Throws LoadError on malformed files or invalid regexes.
std::shared_ptr<MockBackend> load_mock_script(const std::filesystem::path& path);

}  // namespace dualknow
