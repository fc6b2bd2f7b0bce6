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

#include "memaudit/backend.hpp"

#include <algorithm>
#include <cmath>

namespace memaudit {

std::string_view backend_error_label(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::kUnavailable: return "BackendUnavailable";
    case BackendErrorKind::kTimeout: return "Timeout";
    case BackendErrorKind::kRejected: return "GenerationRejected";
    case BackendErrorKind::kDecode: return "DecodeError";
    case BackendErrorKind::kEmptyInput: return "EmptyInput";
    case BackendErrorKind::kSchema: return "SchemaError";
  }
  return "BackendError";
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
  const double scaled = static_cast<double>(policy.initial_delay.count()) *
                        std::pow(policy.backoff_factor, std::max(0, attempt - 1));
  const double capped = std::min(scaled, static_cast<double>(policy.max_delay.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

BackendSession::BackendSession(Backend& backend, RetryPolicy policy)
    : backend_(backend), policy_(policy) {
  descriptor_ = with_retry(policy_, [&] { return backend_.handshake(); });
  if (descriptor_.embedding_dim == 0) {
    throw BackendError(BackendErrorKind::kSchema, "handshake reported embedding_dim 0");
  }
}

GeneratedImage BackendSession::generate(const std::string& prompt, std::uint64_t seed) {
  if (prompt.empty()) throw BackendError(BackendErrorKind::kEmptyInput, "empty prompt");
  return with_retry(policy_, [&] { return backend_.generate(prompt, seed); });
}

EmbeddingVector BackendSession::embed_image(const GeneratedImage& image) {
  return check_dim(with_retry(policy_, [&] { return backend_.embed_image(image); }));
}

EmbeddingVector BackendSession::embed_text(const std::string& text) {
  if (text.empty()) throw BackendError(BackendErrorKind::kEmptyInput, "empty text");
  return check_dim(with_retry(policy_, [&] { return backend_.embed_text(text); }));
}

double BackendSession::aesthetic_score(const GeneratedImage& image) {
  const double s = with_retry(policy_, [&] { return backend_.aesthetic_score(image); });
  if (!std::isfinite(s)) throw BackendError(BackendErrorKind::kDecode, "non-finite aesthetic");
  return s;
}

EmbeddingVector BackendSession::check_dim(EmbeddingVector v) const {
  if (v.dim() != descriptor_.embedding_dim) {
    throw BackendError(BackendErrorKind::kSchema,
                       "embedding dim " + std::to_string(v.dim()) + " but handshake said " +
                           std::to_string(descriptor_.embedding_dim));
  }
  return v.normalized() ? v : normalize(v);
}

}  // namespace memaudit
