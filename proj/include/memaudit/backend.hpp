/* Copyright 2026 The memaudit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Generation, embedding and aesthetic services behind one interface.

#ifndef MEMAUDIT_BACKEND_HPP_
#define MEMAUDIT_BACKEND_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>

#include "memaudit/vector.hpp"

namespace memaudit {

enum class BackendErrorKind {
  kUnavailable,  // retryable
  kTimeout,      // retryable
  kRejected,     // e.g. a safety filter; not retryable
  kDecode,
  kEmptyInput,
  kSchema,
};

std::string_view backend_error_label(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(backend_error_label(kind)) + ": " + message),
        kind_(kind) {}

  BackendErrorKind kind() const noexcept { return kind_; }
  bool retryable() const noexcept {
    return kind_ == BackendErrorKind::kUnavailable || kind_ == BackendErrorKind::kTimeout;
  }

 private:
  BackendErrorKind kind_;
};

struct BackendDescriptor {
  std::string kind;      // "http" or "mock"
  std::string endpoint;  // http only
  std::size_t embedding_dim = 0;
  std::string model_label;
  bool deterministic = false;
};

// Generation settings forwarded to real backends. The defaults are
// assumptions recorded in run metadata.
struct GenerationParams {
  int width = 512;
  int height = 512;
  int steps = 50;
  double guidance = 7.5;
};

struct GeneratedImage {
  std::string image_id;  // SHA-256 of `bytes`
  std::string bytes;     // inline payload
  std::string prompt_used;
  std::uint64_t seed = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual BackendDescriptor handshake() = 0;
  virtual GeneratedImage generate(const std::string& prompt, std::uint64_t seed) = 0;
  virtual EmbeddingVector embed_image(const GeneratedImage& image) = 0;
  virtual EmbeddingVector embed_text(const std::string& text) = 0;
  virtual double aesthetic_score(const GeneratedImage& image) = 0;
};

struct RetryPolicy {
  int max_retries = 4;
  std::chrono::milliseconds initial_delay{200};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_delay{5000};
};

// Delay before retry number `attempt` (1-based), capped at max_delay.
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt);

// Runs `fn`, retrying retryable BackendErrors with capped exponential
// backoff. The last error is rethrown once retries are exhausted.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn,
                const std::function<void(std::chrono::milliseconds)>& sleep = {})
    -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= policy.max_retries) throw;
      const auto delay = backoff_delay(policy, attempt + 1);
      if (sleep) {
        sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
  }
}

// Wraps a backend for one audit session: performs the handshake up front,
// applies the retry policy to every call and checks that each embedding has
// the announced dimension.
class BackendSession {
 public:
  BackendSession(Backend& backend, RetryPolicy policy = {});

  const BackendDescriptor& descriptor() const noexcept { return descriptor_; }

  GeneratedImage generate(const std::string& prompt, std::uint64_t seed);
  EmbeddingVector embed_image(const GeneratedImage& image);
  EmbeddingVector embed_text(const std::string& text);
  double aesthetic_score(const GeneratedImage& image);

 private:
  EmbeddingVector check_dim(EmbeddingVector v) const;

  Backend& backend_;
  RetryPolicy policy_;
  BackendDescriptor descriptor_;
};

}  // namespace memaudit

#endif  // MEMAUDIT_BACKEND_HPP_
