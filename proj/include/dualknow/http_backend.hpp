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

#include <json.hpp>

#include "dualknow/gateway.hpp"

namespace dualknow {

/// Chat-completion client over HTTP(S). One POST per send(); the bearer
/// token is read from the configured environment variable on each call.
class HttpBackend : public ChatBackend {
 public:
  std::string send(const ChatRequest& request, const EndpointConfig& config) override;
  std::string id() const override { return "http"; }

  /// {model, messages: [{role, content}], temperature, max_tokens}. Image
  /// references become image_url content parts.
  static nlohmann::json build_payload(const ChatRequest& request, const EndpointConfig& config);

  /// First choice's message content. Throws ProtocolError on other shapes.
  static std::string parse_completion(int status, const std::string& body);
};

struct ParsedUrl {
  std::string scheme_host_port;  // "http://host:port"
  std::string path;              // "/v1/chat/completions"
};

/// Throws ConfigError on anything that is not http(s)://host[:port][/path].
ParsedUrl parse_url(const std::string& url);

}  // namespace dualknow
