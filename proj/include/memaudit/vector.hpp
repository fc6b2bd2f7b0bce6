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

// Dense embedding vectors, cosine similarity and exact top-k search.

#ifndef MEMAUDIT_VECTOR_HPP_
#define MEMAUDIT_VECTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace memaudit {

// Tolerance on the Euclidean norm for a vector flagged as normalized.
inline constexpr double kNormalizedTolerance = 1e-4;
// Tolerance applied to stored corpus rows at ingest.
inline constexpr double kStoredRowTolerance = 1e-3;
// Norms below this are treated as the zero vector.
inline constexpr double kZeroNormEpsilon = 1e-12;

// A point in the joint image/text embedding space. Components are held in
// double precision regardless of how they were stored.
class EmbeddingVector {
 public:
  // Throws FormatError on empty or non-finite input.
  explicit EmbeddingVector(std::vector<double> values);

  // Builds a vector and flags it as normalized. Throws NotNormalized if its
  // norm is further than kNormalizedTolerance from 1.
  static EmbeddingVector unit(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  bool normalized() const noexcept { return normalized_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  EmbeddingVector(std::vector<double> values, bool normalized);
  friend EmbeddingVector normalize(const EmbeddingVector& v);

  std::vector<double> values_;
  bool normalized_ = false;
};

// Cosine similarity clamped to [-1, 1].
class SimilarityScore {
 public:
  SimilarityScore() = default;
  explicit SimilarityScore(double value);

  double value() const noexcept { return value_; }
  friend auto operator<=>(const SimilarityScore&, const SimilarityScore&) = default;

 private:
  double value_ = 0.0;
};

// Immutable row-major bulk store of unit-norm rows in single precision.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Validates length, finiteness and that every row is unit norm within
  // `row_tolerance`. Throws FormatError, NotNormalized or EmptyCorpus.
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> storage,
                  double row_tolerance = kStoredRowTolerance);

  // Normalizes each input vector and packs them. All must share one dim.
  static EmbeddingMatrix from_vectors(std::span<const EmbeddingVector> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> storage() const noexcept { return storage_; }
  std::span<const float> row(std::size_t i) const;
  // Row widened to a (normalized) EmbeddingVector.
  EmbeddingVector row_vector(std::size_t i) const;
  // 1/|row| of the stored floats; float rounding leaves rows ~1e-8 off unit.
  double inverse_norm(std::size_t i) const noexcept { return inv_norms_[i]; }

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> storage_;
  std::vector<double> inv_norms_;
};

struct Neighbor {
  std::size_t row = 0;
  SimilarityScore score;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Throws ZeroVector if the norm is below kZeroNormEpsilon.
EmbeddingVector normalize(const EmbeddingVector& v);

// Plain dot product when both inputs carry the normalized flag, the full
// cosine formula otherwise. Throws DimensionMismatch or ZeroVector.
SimilarityScore cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Exact scan returning min(k, rows) neighbors ordered by descending score,
// ties broken by ascending row index. `threads` > 1 splits the scan into
// chunks; the result is identical to the serial scan.
std::vector<Neighbor> top_k_similar(const EmbeddingVector& query,
                                    const EmbeddingMatrix& corpus, std::size_t k,
                                    std::size_t threads = 1);

}  // namespace memaudit

#endif  // MEMAUDIT_VECTOR_HPP_
