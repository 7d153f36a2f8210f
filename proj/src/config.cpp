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

#include "dualknow/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "dualknow/error.hpp"
#include "dualknow/http_backend.hpp"
#include "dualknow/mock_backend.hpp"

namespace dualknow {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("wrong type for '") + key + "'");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string env_name(Endpoint e, const char* suffix) {
  std::string name = "DUALKNOW_";
  for (char c : to_string(e)) name.push_back(static_cast<char>(std::toupper(c)));
  return name + "_" + suffix;
}

}  // namespace

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    throw ConfigError("config " + path.string() + " is not a JSON object");
  return from_json(doc, path.parent_path());
}

RunConfig RunConfig::from_json(const json& doc, const fs::path& base_dir) {
  reject_unknown_keys(doc,
                      {"paths", "retrieval", "window_turns", "endpoints", "decoding",
                       "parallelism", "seed", "skip_filter", "skip_clues"},
                      "config");
  RunConfig config;
  config.snapshot = doc;

  const json paths = doc.value("paths", json::object());
  reject_unknown_keys(paths, {"kb", "dialogs", "assets", "output"}, "paths");
  config.kb_path = resolve(base_dir, get_or<std::string>(paths, "kb", ""));
  config.dialogs_path = resolve(base_dir, get_or<std::string>(paths, "dialogs", ""));
  config.assets_dir = resolve(base_dir, get_or<std::string>(paths, "assets", ""));
  config.output_dir = resolve(base_dir, get_or<std::string>(paths, "output", ""));

  const json retrieval = doc.value("retrieval", json::object());
  reject_unknown_keys(retrieval, {"theta", "max_reviews_per_entity", "max_knowledge_chars"},
                      "retrieval");
  config.retrieval.theta = get_or(retrieval, "theta", config.retrieval.theta);
  config.retrieval.max_reviews_per_entity =
      get_or(retrieval, "max_reviews_per_entity", config.retrieval.max_reviews_per_entity);
  config.retrieval.max_knowledge_chars =
      get_or(retrieval, "max_knowledge_chars", config.retrieval.max_knowledge_chars);

  const json decoding = doc.value("decoding", json::object());
  reject_unknown_keys(decoding,
                      {"temperature", "generation_max_new_tokens", "judge_max_new_tokens"},
                      "decoding");
  config.decoding.temperature = get_or(decoding, "temperature", config.decoding.temperature);
  config.decoding.generation_max_new_tokens =
      get_or(decoding, "generation_max_new_tokens", config.decoding.generation_max_new_tokens);
  config.decoding.judge_max_new_tokens =
      get_or(decoding, "judge_max_new_tokens", config.decoding.judge_max_new_tokens);

  config.window_turns = get_or(doc, "window_turns", config.window_turns);
  config.parallelism = get_or(doc, "parallelism", config.parallelism);
  config.seed = get_or<std::uint64_t>(doc, "seed", config.seed);
  config.skip_filter = get_or(doc, "skip_filter", config.skip_filter);
  config.skip_clues = get_or(doc, "skip_clues", config.skip_clues);

  const json endpoints = doc.value("endpoints", json::object());
  for (const auto& [name, spec_json] : endpoints.items()) {
    const Endpoint endpoint = parse_endpoint(name);
    reject_unknown_keys(spec_json,
                        {"mock_script", "base_url", "model", "api_key_env_var", "timeout_ms",
                         "max_retries", "concurrency_limit", "image_url_prefix"},
                        "endpoints." + name);
    EndpointSpec spec;
    EndpointConfig& ec = spec.config;
    ec.base_url = get_or<std::string>(spec_json, "base_url", "");
    ec.model_name = get_or<std::string>(spec_json, "model", "");
    ec.api_key_env_var = get_or<std::string>(spec_json, "api_key_env_var", "");
    ec.timeout_ms = get_or(spec_json, "timeout_ms", ec.timeout_ms);
    ec.max_retries = get_or(spec_json, "max_retries", ec.max_retries);
    ec.concurrency_limit = get_or(spec_json, "concurrency_limit", ec.concurrency_limit);
    ec.image_url_prefix = get_or<std::string>(spec_json, "image_url_prefix", "");
    if (const char* url = std::getenv(env_name(endpoint, "BASE_URL").c_str()); url && *url)
      ec.base_url = url;
    if (const char* model = std::getenv(env_name(endpoint, "MODEL").c_str()); model && *model)
      ec.model_name = model;
    if (auto script = get_or<std::string>(spec_json, "mock_script", ""); !script.empty())
      spec.mock_script = resolve(base_dir, script);
    config.endpoints[endpoint] = std::move(spec);
  }
  return config;
}

void RunConfig::validate(bool require_dialogs) const {
  retrieval.validate();
  if (window_turns < 1) throw ConfigError("window_turns must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (decoding.temperature < 0) throw ConfigError("decoding.temperature must be >= 0");
  if (decoding.generation_max_new_tokens <= 0 || decoding.judge_max_new_tokens <= 0)
    throw ConfigError("decoding token limits must be > 0");
  auto require = [&](Endpoint e) {
    if (!endpoints.contains(e))
      throw ConfigError("endpoint " + std::string(to_string(e)) + " is not configured");
  };
  require(Endpoint::kGenerator);
  if (!skip_filter) require(Endpoint::kJudge);
  if (!skip_clues) require(Endpoint::kClueExtractor);
  for (const auto& [endpoint, spec] : endpoints) {
    spec.config.validate();
    if (!spec.mock_script && spec.config.base_url.empty())
      throw ConfigError("endpoint " + std::string(to_string(endpoint)) +
                        " needs base_url or mock_script");
    if (spec.mock_script && !fs::exists(*spec.mock_script))
      throw ConfigError("mock script not found: " + spec.mock_script->string());
  }
  for (const auto& [label, path] : {std::pair{"kb", kb_path}, std::pair{"dialogs", dialogs_path},
                                    std::pair{"assets", assets_dir}}) {
    if (!require_dialogs && path == dialogs_path) continue;
    if (path.empty()) throw ConfigError(std::string("paths.") + label + " is required");
    if (!fs::exists(path)) throw ConfigError(std::string("paths.") + label + " not found: " + path.string());
  }
}

json RunConfig::effective_snapshot() const {
  json out = snapshot;
  out["retrieval"] = {{"theta", retrieval.theta},
                      {"max_reviews_per_entity", retrieval.max_reviews_per_entity},
                      {"max_knowledge_chars", retrieval.max_knowledge_chars}};
  out["decoding"] = {{"temperature", decoding.temperature},
                     {"generation_max_new_tokens", decoding.generation_max_new_tokens},
                     {"judge_max_new_tokens", decoding.judge_max_new_tokens}};
  out["window_turns"] = window_turns;
  out["parallelism"] = parallelism;
  out["seed"] = seed;
  out["skip_filter"] = skip_filter;
  out["skip_clues"] = skip_clues;
  return out;
}

std::unique_ptr<Gateway> make_gateway(const RunConfig& config) {
  auto gateway = std::make_unique<Gateway>(config.seed);
  auto http = std::make_shared<HttpBackend>();
  for (const auto& [endpoint, spec] : config.endpoints) {
    std::shared_ptr<ChatBackend> backend;
    if (spec.mock_script) {
      try {
        backend = load_mock_script(*spec.mock_script);
      } catch (const LoadError& e) {
        throw ConfigError(e.what());
      }
    } else {
      parse_url(spec.config.base_url);
      backend = http;
    }
    gateway->set_endpoint(endpoint, spec.config, std::move(backend));
  }
  return gateway;
}

}  // namespace dualknow
