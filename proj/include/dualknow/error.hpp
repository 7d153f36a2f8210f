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

#include <stdexcept>
#include <string>

namespace dualknow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (knowledge base, dialogs, scripts).
class LoadError : public Error {
 public:
  using Error::Error;
};

/// A referenced image id has no caption or embedding record.
class AssetError : public Error {
 public:
  explicit AssetError(const std::string& image_id)
      : Error("missing asset: " + image_id), image_id_(image_id) {}

  const std::string& image_id() const { return image_id_; }

 private:
  std::string image_id_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Connection failures and timeouts. These are the only retryable errors.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The service answered with a non-success status.
class ProtocolError : public Error {
 public:
  ProtocolError(int status, std::string body_excerpt)
      : Error("protocol error: status " + std::to_string(status) + ": " +
              body_excerpt),
        status_(status),
        body_excerpt_(std::move(body_excerpt)) {}

  int status() const { return status_; }
  const std::string& body_excerpt() const { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

class EmptyOutputError : public Error {
 public:
  using Error::Error;
};

/// No mock script rule matched a request.
class ScriptedMissError : public Error {
 public:
  explicit ScriptedMissError(const std::string& fingerprint)
      : Error("scripted miss: no rule matches request fingerprint " +
              fingerprint),
        fingerprint_(fingerprint) {}

  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::string fingerprint_;
};

}  // namespace dualknow
