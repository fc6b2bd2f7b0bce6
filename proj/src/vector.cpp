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

#include "memaudit/vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "memaudit/error.hpp"

namespace memaudit {
namespace {

double sum_squares(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

void check_finite(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::kFormatError, "embedding has zero dimensions");
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kFormatError, "embedding has a non-finite component");
    }
  }
}

// Strict total order used everywhere results are ranked.
bool ranks_before(const Neighbor& a, const Neighbor& b) {
  if (a.score.value() != b.score.value()) return a.score.value() > b.score.value();
  return a.row < b.row;
}

double row_dot(std::span<const double> q, std::span<const float> row) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) acc += q[i] * static_cast<double>(row[i]);
  return acc;
}

std::vector<Neighbor> scan_range(std::span<const double> q, double scale,
                                 const EmbeddingMatrix& corpus, std::size_t begin,
                                 std::size_t end, std::size_t k) {
  std::vector<Neighbor> heap;
  heap.reserve(k + 1);
  for (std::size_t r = begin; r < end; ++r) {
    Neighbor n{r, SimilarityScore(row_dot(q, corpus.row(r)) * scale * corpus.inverse_norm(r))};
    if (heap.size() < k) {
      heap.push_back(n);
      std::push_heap(heap.begin(), heap.end(), ranks_before);
    } else if (ranks_before(n, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), ranks_before);
      heap.back() = n;
      std::push_heap(heap.begin(), heap.end(), ranks_before);
    }
  }
  return heap;
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values)
    : EmbeddingVector(std::move(values), false) {}

EmbeddingVector::EmbeddingVector(std::vector<double> values, bool normalized)
    : values_(std::move(values)), normalized_(normalized) {
  check_finite(values_);
}

EmbeddingVector EmbeddingVector::unit(std::vector<double> values) {
  EmbeddingVector v(std::move(values), false);
  if (std::abs(v.norm() - 1.0) > kNormalizedTolerance) {
    throw Error(ErrorCode::kNotNormalized,
                "norm " + std::to_string(v.norm()) + " is not 1");
  }
  v.normalized_ = true;
  return v;
}

double EmbeddingVector::norm() const { return std::sqrt(sum_squares(values_)); }

SimilarityScore::SimilarityScore(double value) : value_(std::clamp(value, -1.0, 1.0)) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim,
                                 std::vector<float> storage, double row_tolerance)
    : rows_(rows), dim_(dim), storage_(std::move(storage)) {
  if (dim_ == 0) throw Error(ErrorCode::kFormatError, "dim must be positive");
  if (rows_ == 0) throw Error(ErrorCode::kEmptyCorpus, "matrix has no rows");
  if (storage_.size() != rows_ * dim_) {
    throw Error(ErrorCode::kFormatError, "storage length does not equal rows*dim");
  }
  inv_norms_.resize(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    double sq = 0.0;
    for (float x : row(r)) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::kFormatError,
                    "row " + std::to_string(r) + " has a non-finite component");
      }
      sq += static_cast<double>(x) * static_cast<double>(x);
    }
    if (std::abs(std::sqrt(sq) - 1.0) > row_tolerance) {
      throw Error(ErrorCode::kNotNormalized,
                  "row " + std::to_string(r) + " has norm " + std::to_string(std::sqrt(sq)));
    }
    inv_norms_[r] = 1.0 / std::sqrt(sq);
  }
}

EmbeddingMatrix EmbeddingMatrix::from_vectors(std::span<const EmbeddingVector> rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyCorpus, "no vectors given");
  const std::size_t dim = rows.front().dim();
  std::vector<float> storage;
  storage.reserve(rows.size() * dim);
  for (const auto& v : rows) {
    if (v.dim() != dim) throw Error(ErrorCode::kDimensionMismatch, "rows differ in dim");
    const auto unit = normalize(v);
    for (double x : unit.values()) storage.push_back(static_cast<float>(x));
  }
  return EmbeddingMatrix(rows.size(), dim, std::move(storage));
}

std::span<const float> EmbeddingMatrix::row(std::size_t i) const {
  return std::span<const float>(storage_).subspan(i * dim_, dim_);
}

EmbeddingVector EmbeddingMatrix::row_vector(std::size_t i) const {
  auto r = row(i);
  return EmbeddingVector::unit(std::vector<double>(r.begin(), r.end()));
}

EmbeddingVector normalize(const EmbeddingVector& v) {
  const double n = v.norm();
  if (n < kZeroNormEpsilon) throw Error(ErrorCode::kZeroVector, "cannot normalize");
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x /= n;
  return EmbeddingVector(std::move(out), true);
}

SimilarityScore cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a[i] * b[i];
  if (a.normalized() && b.normalized()) return SimilarityScore(dot);
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kZeroNormEpsilon || nb < kZeroNormEpsilon) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  }
  return SimilarityScore(dot / (na * nb));
}

std::vector<Neighbor> top_k_similar(const EmbeddingVector& query,
                                    const EmbeddingMatrix& corpus, std::size_t k,
                                    std::size_t threads) {
  if (corpus.rows() == 0) throw Error(ErrorCode::kEmptyCorpus, "corpus has no rows");
  if (query.dim() != corpus.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query dim " + std::to_string(query.dim()) + " vs corpus dim " +
                    std::to_string(corpus.dim()));
  }
  if (k == 0) throw Error(ErrorCode::kInvalidConfig, "k must be positive");
  k = std::min(k, corpus.rows());

  double scale = 1.0;
  if (!query.normalized()) {
    const double n = query.norm();
    if (n < kZeroNormEpsilon) throw Error(ErrorCode::kZeroVector, "zero query");
    scale = 1.0 / n;
  }

  const std::size_t workers =
      std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, corpus.rows() / 4096));
  std::vector<Neighbor> merged;
  if (workers == 1) {
    merged = scan_range(query.values(), scale, corpus, 0, corpus.rows(), k);
  } else {
    std::vector<std::vector<Neighbor>> partial(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (corpus.rows() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(corpus.rows(), begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        partial[w] = scan_range(query.values(), scale, corpus, begin, end, k);
      });
    }
    for (auto& t : pool) t.join();
    for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
  }
  std::sort(merged.begin(), merged.end(), ranks_before);
  merged.resize(std::min(k, merged.size()));
  return merged;
}

}  // namespace memaudit
