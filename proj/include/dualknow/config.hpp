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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "dualknow/gateway.hpp"
#include "dualknow/retrieval.hpp"

namespace dualknow {

struct DecodingConfig {
  double temperature = 0.0;
  int generation_max_new_tokens = 256;
  int judge_max_new_tokens = 512;
};

struct EndpointSpec {
  EndpointConfig config;
  /// When set the endpoint is served by a scripted mock instead of HTTP.
  std::optional<std::filesystem::path> mock_script;
};

/// Everything a batch run needs. Loaded from a single JSON file; relative
/// paths resolve against that file's directory.
struct RunConfig {
  std::filesystem::path kb_path;
  std::filesystem::path dialogs_path;
  std::filesystem::path assets_dir;
  std::filesystem::path output_dir;
  RetrievalConfig retrieval;
  int window_turns = 2;
  std::map<Endpoint, EndpointSpec> endpoints;
  DecodingConfig decoding;
  int parallelism = 1;
  std::uint64_t seed = 0;
  bool skip_filter = false;
  bool skip_clues = false;

  /// Config as written, for the run manifest (paths kept as given).
  nlohmann::json snapshot;

  /// Throws ConfigError. DUALKNOW_<ENDPOINT>_BASE_URL and
  /// DUALKNOW_<ENDPOINT>_MODEL override the file's endpoint settings.
  static RunConfig load(const std::filesystem::path& path);
  static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

  /// Range checks, endpoint presence, and existence of input paths. The
  /// dialogs file is optional for interactive use.
  void validate(bool require_dialogs = true) const;

  /// Snapshot with the effective retrieval, decoding and ablation values.
  nlohmann::json effective_snapshot() const;
};

/// Builds a gateway with one backend per configured endpoint.
std::unique_ptr<Gateway> make_gateway(const RunConfig& config);

}  // namespace dualknow
