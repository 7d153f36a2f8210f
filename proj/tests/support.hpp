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

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dualknow/config.hpp"
#include "dualknow/gateway.hpp"
#include "dualknow/mock_backend.hpp"

namespace dualknow::testing {

inline std::filesystem::path data_dir() { return DUALKNOW_TEST_DATA_DIR; }
inline std::filesystem::path corpus_dir() { return data_dir() / "corpus"; }
inline std::filesystem::path golden_dir() { return data_dir() / "golden"; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dualknow_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Records every request before handing it to the wrapped backend.
class RecordingBackend : public ChatBackend {
 public:
  explicit RecordingBackend(std::shared_ptr<ChatBackend> inner) : inner_(std::move(inner)) {}

  std::string send(const ChatRequest& request, const EndpointConfig& config) override {
    {
      std::lock_guard lock(mu_);
      requests_.push_back(request);
    }
    return inner_->send(request, config);
  }
  std::string id() const override { return inner_->id(); }

  std::vector<ChatRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

  std::vector<ChatRequest> requests_for(Endpoint endpoint) const {
    std::vector<ChatRequest> out;
    for (auto& r : requests())
      if (r.endpoint == endpoint) out.push_back(r);
    return out;
  }

 private:
  std::shared_ptr<ChatBackend> inner_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> requests_;
};

// Fixture config with an optional dialogs file swap.
inline RunConfig fixture_config(const std::string& dialogs = "dialogs_20.jsonl") {
  RunConfig config = RunConfig::load(corpus_dir() / "config.json");
  config.dialogs_path = corpus_dir() / dialogs;
  return config;
}

// A gateway whose three endpoints share one recording mock.
inline std::unique_ptr<Gateway> recording_gateway(std::shared_ptr<RecordingBackend>& recorder) {
  recorder = std::make_shared<RecordingBackend>(
      load_mock_script(corpus_dir() / "mocks" / "script.jsonl"));
  auto gateway = std::make_unique<Gateway>();
  gateway->set_sleeper([](std::chrono::milliseconds) {});
  for (Endpoint e : kAllEndpoints) gateway->set_endpoint(e, EndpointConfig{}, recorder);
  return gateway;
}

}  // namespace dualknow::testing
