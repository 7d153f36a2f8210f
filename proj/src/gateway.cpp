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

#include "dualknow/gateway.hpp"

#include <cmath>
#include <thread>

#include "dualknow/error.hpp"
#include "dualknow/text.hpp"

namespace dualknow {

std::string_view to_string(Endpoint endpoint) {
  switch (endpoint) {
    case Endpoint::kGenerator:
      return "generator";
    case Endpoint::kJudge:
      return "judge";
    case Endpoint::kClueExtractor:
      return "clue_extractor";
  }
  return "unknown";
}

Endpoint parse_endpoint(std::string_view name) {
  for (Endpoint e : kAllEndpoints)
    if (to_string(e) == name) return e;
  throw ConfigError("unknown endpoint '" + std::string(name) + "'");
}

void EndpointConfig::validate() const {
  if (timeout_ms <= 0) throw ConfigError("endpoint timeout_ms must be > 0");
  if (max_retries < 0) throw ConfigError("endpoint max_retries must be >= 0");
  if (concurrency_limit < 1) throw ConfigError("endpoint concurrency_limit must be >= 1");
}

FifoSemaphore::FifoSemaphore(int limit) : limit_(static_cast<std::uint64_t>(limit)) {
  if (limit < 1) throw PreconditionError("semaphore limit must be >= 1");
}

void FifoSemaphore::acquire() {
  std::unique_lock lock(mu_);
  const std::uint64_t ticket = next_ticket_++;
  // Tickets are admitted in order: ticket t may enter once fewer than
  // `limit_` earlier tickets are still holding a slot.
  cv_.wait(lock, [&] { return ticket < released_ + limit_ && ticket == admitted_; });
  ++admitted_;
  cv_.notify_all();
}

void FifoSemaphore::release() {
  {
    std::lock_guard lock(mu_);
    ++released_;
  }
  cv_.notify_all();
}

int FifoSemaphore::in_flight() const {
  std::lock_guard lock(mu_);
  return static_cast<int>(admitted_ - released_);
}

BackoffPolicy::BackoffPolicy(std::chrono::milliseconds base, double factor, std::uint64_t seed)
    : base_(base), factor_(factor), rng_(seed) {}

std::chrono::milliseconds BackoffPolicy::upper_bound(int retry) const {
  const double ms = static_cast<double>(base_.count()) * std::pow(factor_, retry);
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

std::chrono::milliseconds BackoffPolicy::next_delay(int retry) {
  std::uniform_int_distribution<std::int64_t> dist(0, upper_bound(retry).count());
  std::lock_guard lock(mu_);
  return std::chrono::milliseconds(dist(rng_));
}

Gateway::Gateway(std::uint64_t seed)
    : backoff_(std::chrono::milliseconds(500), 2.0, seed),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

void Gateway::set_endpoint(Endpoint endpoint, EndpointConfig config,
                           std::shared_ptr<ChatBackend> backend) {
  config.validate();
  if (!backend) throw PreconditionError("null backend for " + std::string(to_string(endpoint)));
  auto s = std::make_unique<Slot>();
  s->admission = std::make_unique<FifoSemaphore>(config.concurrency_limit);
  s->config = std::move(config);
  s->backend = std::move(backend);
  slots_[endpoint] = std::move(s);
}

bool Gateway::has_endpoint(Endpoint endpoint) const { return slots_.contains(endpoint); }

Gateway::Slot& Gateway::slot(Endpoint endpoint) const {
  auto it = slots_.find(endpoint);
  if (it == slots_.end())
    throw ConfigError("endpoint not configured: " + std::string(to_string(endpoint)));
  return *it->second;
}

const EndpointConfig& Gateway::config(Endpoint endpoint) const { return slot(endpoint).config; }

std::uint64_t Gateway::calls(Endpoint endpoint) const {
  auto it = slots_.find(endpoint);
  return it == slots_.end() ? 0 : it->second->calls.load();
}

ChatResponse Gateway::complete(const ChatRequest& request) {
  if (!request.image_refs.empty() && request.endpoint != Endpoint::kClueExtractor)
    throw PreconditionError("endpoint " + std::string(to_string(request.endpoint)) +
                            " does not accept images");
  if (request.temperature < 0.0) throw PreconditionError("temperature must be >= 0");
  if (request.max_new_tokens <= 0) throw PreconditionError("max_new_tokens must be > 0");

  Slot& s = slot(request.endpoint);
  ++s.calls;
  const auto start = std::chrono::steady_clock::now();

  s.admission->acquire();
  struct Release {
    FifoSemaphore& sem;
    ~Release() { sem.release(); }
  } release{*s.admission};

  for (int attempt = 0;; ++attempt) {
    try {
      std::string reply = s.backend->send(request, s.config);
      if (text::trim(reply).empty())
        throw EmptyOutputError("empty completion from " + s.backend->id() + " for request " +
                               request.request_id);
      ChatResponse response;
      response.text = std::move(reply);
      response.backend_id = s.backend->id();
      response.attempts = attempt + 1;
      response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
      return response;
    } catch (const TransportError& e) {
      if (attempt >= s.config.max_retries)
        throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt + 1) +
                             " attempts)");
      sleeper_(backoff_.next_delay(attempt));
    }
  }
}

}  // namespace dualknow
