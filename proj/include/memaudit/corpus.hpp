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

// The training caption/image corpus: a JSON-lines manifest paired with a
// MEMBED01 embedding store, one row per manifest line.

#ifndef MEMAUDIT_CORPUS_HPP_
#define MEMAUDIT_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "memaudit/vector.hpp"

namespace memaudit {

struct CorpusRecord {
  std::string record_id;
  std::string caption;
  std::string image_ref;
  std::size_t embedding_row = 0;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

class CorpusIndex {
 public:
  // Validates ids, captions and the record/row correspondence. The digest
  // is supplied by the loader so it always reflects the source bytes.
  CorpusIndex(std::vector<CorpusRecord> records, EmbeddingMatrix embeddings,
              std::string source_digest);

  const std::vector<CorpusRecord>& records() const noexcept { return records_; }
  const EmbeddingMatrix& embeddings() const noexcept { return embeddings_; }
  const std::string& source_digest() const noexcept { return source_digest_; }
  std::size_t size() const noexcept { return records_.size(); }

  const CorpusRecord* find(std::string_view record_id) const;
  // Throws UnknownCaption when absent.
  const CorpusRecord& at(std::string_view record_id) const;
  EmbeddingVector embedding_of(const CorpusRecord& record) const;

 private:
  std::vector<CorpusRecord> records_;
  EmbeddingMatrix embeddings_;
  std::string source_digest_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// SHA-256 over the manifest bytes followed by the store bytes.
std::string corpus_digest(std::string_view manifest_bytes, std::string_view store_bytes);

std::vector<CorpusRecord> parse_manifest(std::string_view manifest_bytes);
std::string encode_manifest(const std::vector<CorpusRecord>& records);

CorpusIndex load_corpus(const std::filesystem::path& manifest_path,
                        const std::filesystem::path& store_path);
void write_corpus(const CorpusIndex& corpus, const std::filesystem::path& manifest_path,
                  const std::filesystem::path& store_path);

// n distinct records, uniform without replacement (partial Fisher-Yates over
// SplitMix64). Returned in draw order. Throws SampleTooLarge.
std::vector<CorpusRecord> sample_captions(const CorpusIndex& corpus, std::size_t n,
                                          std::uint64_t rng_seed);

}  // namespace memaudit

#endif  // MEMAUDIT_CORPUS_HPP_
