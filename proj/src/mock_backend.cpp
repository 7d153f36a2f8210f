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

#include "dualknow/mock_backend.hpp"

#include "dualknow/error.hpp"
#include "dualknow/jsonl.hpp"
#include "dualknow/text.hpp"

namespace dualknow {

MockBackend::MockBackend(std::vector<MockRule> rules, std::string id)
    : rules_(std::move(rules)), id_(std::move(id)) {
  compiled_.reserve(rules_.size());
  for (const auto& rule : rules_) {
    if (rule.kind == MockRule::Kind::kRegex) {
      try {
        compiled_.emplace_back(std::regex(rule.pattern, std::regex::ECMAScript));
      } catch (const std::regex_error& e) {
        throw LoadError("invalid regex '" + rule.pattern + "': " + e.what());
      }
    } else {
      compiled_.emplace_back(std::nullopt);
    }
  }
}

std::string MockBackend::full_prompt(const ChatRequest& request) {
  return request.system_text + "\n" + request.user_text;
}

std::string MockBackend::request_fingerprint(const ChatRequest& request) {
  return text::fingerprint(request.system_text + request.user_text);
}

std::string MockBackend::send(const ChatRequest& request, const EndpointConfig&) {
  const std::string prompt = full_prompt(request);
  const std::string fp = request_fingerprint(request);
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const MockRule& rule = rules_[i];
    if (rule.endpoint && *rule.endpoint != request.endpoint) continue;
    switch (rule.kind) {
      case MockRule::Kind::kExactFingerprint:
        if (rule.pattern == fp) return rule.response;
        break;
      case MockRule::Kind::kSubstring:
        if (prompt.find(rule.pattern) != std::string::npos) return rule.response;
        break;
      case MockRule::Kind::kRegex: {
        std::smatch m;
        if (std::regex_search(prompt, m, *compiled_[i])) return m.format(rule.response);
        break;
      }
    }
  }
  throw ScriptedMissError(fp);
}

std::shared_ptr<MockBackend> load_mock_script(const std::filesystem::path& path) {
  std::vector<MockRule> rules;
  jsonl::for_each_record(path, [&](const nlohmann::json& rec, std::size_t line) {
    if (!rec.contains("match") || !rec["match"].is_object())
      throw LoadError(jsonl::where(path, line) + ": missing 'match' object");
    const auto& match = rec["match"];
    MockRule rule;
    const std::string kind = jsonl::require_string(match, "kind", path, line);
    if (kind == "exact_fingerprint") {
      rule.kind = MockRule::Kind::kExactFingerprint;
    } else if (kind == "substring") {
      rule.kind = MockRule::Kind::kSubstring;
    } else if (kind == "regex") {
      rule.kind = MockRule::Kind::kRegex;
    } else {
      throw LoadError(jsonl::where(path, line) + ": unknown match kind '" + kind + "'");
    }
    rule.pattern = jsonl::require_string(match, "pattern", path, line);
    rule.response = jsonl::require_string(rec, "response", path, line);
    if (rec.contains("endpoint")) {
      try {
        rule.endpoint = parse_endpoint(rec["endpoint"].get<std::string>());
      } catch (const ConfigError& e) {
        throw LoadError(jsonl::where(path, line) + ": " + e.what());
      }
    }
    rules.push_back(std::move(rule));
  });
  try {
    return std::make_shared<MockBackend>(std::move(rules), "mock:" + path.filename().string());
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

}  // namespace dualknow
