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
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dualknow {

enum class Endpoint { kGenerator, kJudge, kClueExtractor };

std::string_view to_string(Endpoint endpoint);
/// Accepts "generator", "judge" and "clue_extractor". Throws ConfigError.
Endpoint parse_endpoint(std::string_view name);

inline constexpr Endpoint kAllEndpoints[] = {Endpoint::kGenerator, Endpoint::kJudge,
                                             Endpoint::kClueExtractor};

struct ChatRequest {
  Endpoint endpoint = Endpoint::kGenerator;
  std::string system_text;
  std::string user_text;
  /// Only the clue extractor accepts images.
  std::vector<std::string> image_refs;
  double temperature = 0.0;
  int max_new_tokens = 256;
  std::string request_id;

  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct ChatResponse {
  std::string text;
  std::int64_t latency_ms = 0;
  std::string backend_id;
  /// 1 + number of retries spent.
  int attempts = 1;
};

struct EndpointConfig {
  std::string base_url;
  std::string model_name;
  std::string api_key_env_var;
  int timeout_ms = 60000;
  int max_retries = 2;
  int concurrency_limit = 4;
  /// Prepended to image ids when images are sent by reference.
  std::string image_url_prefix;

  void validate() const;
};

/// Sends one request and returns the completion text. Implementations throw
/// TransportError for retryable failures, ProtocolError for non-success
/// replies. Must be safe to call concurrently.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string send(const ChatRequest& request, const EndpointConfig& config) = 0;
  virtual std::string id() const = 0;
};

/// Counting semaphore that admits waiters strictly in arrival order.
class FifoSemaphore {
 public:
  explicit FifoSemaphore(int limit);

  void acquire();
  void release();
  int in_flight() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  const std::uint64_t limit_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t released_ = 0;
  std::uint64_t admitted_ = 0;
};

/// Exponential backoff with full jitter: the delay before retry k (k >= 0)
/// is uniform in [0, base * factor^k].
class BackoffPolicy {
 public:
  BackoffPolicy(std::chrono::milliseconds base = std::chrono::milliseconds(500),
                double factor = 2.0, std::uint64_t seed = 0);

  std::chrono::milliseconds upper_bound(int retry) const;
  std::chrono::milliseconds next_delay(int retry);

 private:
  std::chrono::milliseconds base_;
  double factor_;
  std::mutex mu_;
  std::mt19937_64 rng_;
};

/// Routes requests to per-endpoint backends, enforcing the precondition on
/// images, the concurrency limit and the retry contract.
class Gateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit Gateway(std::uint64_t seed = 0);
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void set_endpoint(Endpoint endpoint, EndpointConfig config,
                    std::shared_ptr<ChatBackend> backend);
  bool has_endpoint(Endpoint endpoint) const;
  const EndpointConfig& config(Endpoint endpoint) const;

  /// Replaces the real sleep between retries (tests).
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

  ChatResponse complete(const ChatRequest& request);

  /// Requests accepted per endpoint (not counting retries).
  std::uint64_t calls(Endpoint endpoint) const;

 private:
  struct Slot {
    EndpointConfig config;
    std::shared_ptr<ChatBackend> backend;
    std::unique_ptr<FifoSemaphore> admission;
    std::atomic<std::uint64_t> calls{0};
  };

  Slot& slot(Endpoint endpoint) const;

  std::map<Endpoint, std::unique_ptr<Slot>> slots_;
  BackoffPolicy backoff_;
  Sleeper sleeper_;
};

}  // namespace dualknow
