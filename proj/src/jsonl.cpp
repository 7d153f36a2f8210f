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

#include "dualknow/jsonl.hpp"

#include "dualknow/error.hpp"

namespace dualknow::jsonl {

using json = nlohmann::json;

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError(where(path, number) + ": malformed record: " + e.what());
    }
    if (!rec.is_object()) throw LoadError(where(path, number) + ": record is not an object");
    try {
      fn(rec, number);
    } catch (const json::exception& e) {
      throw LoadError(where(path, number) + ": malformed record: " + e.what());
    }
  }
}

std::string require_string(const json& rec, const char* field,
                           const std::filesystem::path& path, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end() || !it->is_string())
    throw LoadError(where(path, line) + ": missing string field '" + field + "'");
  return it->get<std::string>();
}

const json& optional_array(const json& rec, const char* field,
                           const std::filesystem::path& path, std::size_t line) {
  static const json kEmpty = json::array();
  auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) return kEmpty;
  if (!it->is_array())
    throw LoadError(where(path, line) + ": field '" + field + "' must be a list");
  return *it;
}

std::string scalar_to_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

Writer::Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
}

void Writer::write(const json& record) {
  out_ << record.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
  if (!out_) throw Error("write failed");
}

}  // namespace dualknow::jsonl
