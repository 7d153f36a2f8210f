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

// Line-delimited JSON helpers shared by every file format in the project.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

namespace dualknow::jsonl {

/// "path:line" prefix for error messages.
std::string where(const std::filesystem::path& path, std::size_t line);

/// Invokes `fn(record, line_number)` for every non-blank line. Throws
/// LoadError naming the line on unreadable files or invalid JSON.
void for_each_record(
    const std::filesystem::path& path,
    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

std::string require_string(const nlohmann::json& rec, const char* field,
                           const std::filesystem::path& path, std::size_t line);

/// The array under `field`, or an empty array when absent.
const nlohmann::json& optional_array(const nlohmann::json& rec, const char* field,
                                     const std::filesystem::path& path,
                                     std::size_t line);

/// Strings pass through; numbers and booleans are rendered compactly.
std::string scalar_to_string(const nlohmann::json& value);

/// Writes one compact JSON document per line. Throws Error when the file
/// cannot be opened.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);
  void write(const nlohmann::json& record);

 private:
  std::ofstream out_;
};

}  // namespace dualknow::jsonl
