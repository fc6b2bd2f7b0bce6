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

// Shared helpers for the unit tests.

#ifndef MEMAUDIT_TESTS_TEST_UTIL_HPP_
#define MEMAUDIT_TESTS_TEST_UTIL_HPP_

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "memaudit/corpus.hpp"
#include "memaudit/io.hpp"
#include "memaudit/vector.hpp"

namespace memaudit::testing {

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "memaudit-XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

inline EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t dim) {
  return normalize(EmbeddingVector(random_values(rng, dim)));
}

inline EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
  std::vector<EmbeddingVector> vs;
  for (std::size_t i = 0; i < rows; ++i) vs.push_back(random_unit(rng, dim));
  return EmbeddingMatrix::from_vectors(vs);
}

// Corpus of `rows` random records with ids "c<i>" and captions "caption <i>".
inline std::shared_ptr<const CorpusIndex> random_corpus(std::size_t rows, std::size_t dim,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CorpusRecord> records;
  for (std::size_t i = 0; i < rows; ++i) {
    records.push_back({"c" + std::to_string(i), "caption " + std::to_string(i),
                       "img/" + std::to_string(i) + ".png", i});
  }
  return std::make_shared<const CorpusIndex>(std::move(records), random_matrix(rng, rows, dim),
                                             "test");
}

inline std::string fixture(const std::string& rel) {
  return std::string(MEMAUDIT_FIXTURES) + "/" + rel;
}

}  // namespace memaudit::testing

#endif  // MEMAUDIT_TESTS_TEST_UTIL_HPP_
