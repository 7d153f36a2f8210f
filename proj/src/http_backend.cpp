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

#include "dualknow/http_backend.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "dualknow/error.hpp"

namespace dualknow {

using json = nlohmann::json;

namespace {

constexpr std::size_t kExcerptChars = 200;

std::string excerpt(const std::string& body) {
  return body.size() <= kExcerptChars ? body : body.substr(0, kExcerptChars) + "...";
}

}  // namespace

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("invalid base_url '" + url + "'");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw ConfigError("unsupported scheme in base_url '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  parsed.scheme_host_port = url.substr(0, path_start);
  parsed.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (parsed.scheme_host_port.size() <= scheme_end + 3)
    throw ConfigError("missing host in base_url '" + url + "'");
  return parsed;
}

json HttpBackend::build_payload(const ChatRequest& request, const EndpointConfig& config) {
  json user_content;
  if (request.image_refs.empty()) {
    user_content = request.user_text;
  } else {
    user_content = json::array({{{"type", "text"}, {"text", request.user_text}}});
    for (const auto& id : request.image_refs)
      user_content.push_back(
          {{"type", "image_url"}, {"image_url", {{"url", config.image_url_prefix + id}}}});
  }
  return {{"model", config.model_name},
          {"messages", json::array({{{"role", "system"}, {"content", request.system_text}},
                                    {{"role", "user"}, {"content", std::move(user_content)}}})},
          {"temperature", request.temperature},
          {"max_tokens", request.max_new_tokens}};
}

std::string HttpBackend::parse_completion(int status, const std::string& body) {
  json parsed = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) throw ProtocolError(status, "non-JSON body: " + excerpt(body));
  try {
    const auto& content = parsed.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception&) {
    throw ProtocolError(status, "no choices[0].message.content: " + excerpt(body));
  }
}

std::string HttpBackend::send(const ChatRequest& request, const EndpointConfig& config) {
  const ParsedUrl url = parse_url(config.base_url);
  httplib::Client client(url.scheme_host_port);
  const auto timeout = std::chrono::milliseconds(config.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!config.api_key_env_var.empty()) {
    if (const char* key = std::getenv(config.api_key_env_var.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = build_payload(request, config).dump();
  auto result = client.Post(url.path, headers, body, "application/json");
  if (!result)
    throw TransportError("request " + request.request_id + " to " + config.base_url +
                         " failed: " + httplib::to_string(result.error()));
  if (result->status < 200 || result->status >= 300)
    throw ProtocolError(result->status, excerpt(result->body));
  return parse_completion(result->status, result->body);
}

}  // namespace dualknow
