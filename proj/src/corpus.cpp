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

#include "memaudit/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>

#include "memaudit/embed_store.hpp"
#include "memaudit/error.hpp"
#include "memaudit/io.hpp"
#include "memaudit/rng.hpp"

namespace memaudit {
namespace {

using nlohmann::json;

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::kFormatError, "manifest line " + std::to_string(line + 1) +
                                             ": field '" + key + "' missing or not a string");
  }
  return it->get<std::string>();
}

}  // namespace

CorpusIndex::CorpusIndex(std::vector<CorpusRecord> records, EmbeddingMatrix embeddings,
                         std::string source_digest)
    : records_(std::move(records)),
      embeddings_(std::move(embeddings)),
      source_digest_(std::move(source_digest)) {
  if (records_.size() != embeddings_.rows()) {
    throw Error(ErrorCode::kCountMismatch,
                std::to_string(records_.size()) + " manifest records vs " +
                    std::to_string(embeddings_.rows()) + " embedding rows");
  }
  by_id_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.caption.empty()) {
      throw Error(ErrorCode::kFormatError, "record '" + r.record_id + "' has an empty caption");
    }
    if (r.embedding_row >= embeddings_.rows()) {
      throw Error(ErrorCode::kFormatError, "record '" + r.record_id + "' row out of range");
    }
    if (!by_id_.emplace(r.record_id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "record id '" + r.record_id + "' repeats");
    }
  }
}

const CorpusRecord* CorpusIndex::find(std::string_view record_id) const {
  auto it = by_id_.find(std::string(record_id));
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

const CorpusRecord& CorpusIndex::at(std::string_view record_id) const {
  if (const auto* r = find(record_id)) return *r;
  throw Error(ErrorCode::kUnknownCaption, "no record '" + std::string(record_id) + "'");
}

EmbeddingVector CorpusIndex::embedding_of(const CorpusRecord& record) const {
  return embeddings_.row_vector(record.embedding_row);
}

std::string corpus_digest(std::string_view manifest_bytes, std::string_view store_bytes) {
  Sha256 h;
  h.update(manifest_bytes);
  h.update(store_bytes);
  return h.hex_digest();
}

std::vector<CorpusRecord> parse_manifest(std::string_view manifest_bytes) {
  std::vector<CorpusRecord> records;
  std::size_t pos = 0;
  while (pos < manifest_bytes.size()) {
    auto eol = manifest_bytes.find('\n', pos);
    if (eol == std::string_view::npos) eol = manifest_bytes.size();
    auto line = manifest_bytes.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      throw Error(ErrorCode::kFormatError,
                  "manifest line " + std::to_string(records.size() + 1) + " is blank");
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kFormatError,
                  "manifest line " + std::to_string(records.size() + 1) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw Error(ErrorCode::kFormatError,
                  "manifest line " + std::to_string(records.size() + 1) + " is not an object");
    }
    const std::size_t n = records.size();
    records.push_back({require_string(obj, "id", n), require_string(obj, "caption", n),
                       require_string(obj, "image_ref", n), n});
  }
  return records;
}

std::string encode_manifest(const std::vector<CorpusRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json obj = {{"id", r.record_id}, {"caption", r.caption}, {"image_ref", r.image_ref}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

CorpusIndex load_corpus(const std::filesystem::path& manifest_path,
                        const std::filesystem::path& store_path) {
  const std::string manifest = read_file(manifest_path);
  const std::string store = read_file(store_path);
  auto records = parse_manifest(manifest);
  auto matrix = decode_embedding_store(store);
  return CorpusIndex(std::move(records), std::move(matrix), corpus_digest(manifest, store));
}

void write_corpus(const CorpusIndex& corpus, const std::filesystem::path& manifest_path,
                  const std::filesystem::path& store_path) {
  write_file(manifest_path, encode_manifest(corpus.records()));
  write_embedding_store(store_path, corpus.embeddings());
}

std::vector<CorpusRecord> sample_captions(const CorpusIndex& corpus, std::size_t n,
                                          std::uint64_t rng_seed) {
  if (n > corpus.size()) {
    throw Error(ErrorCode::kSampleTooLarge, "requested " + std::to_string(n) + " of " +
                                                std::to_string(corpus.size()) + " records");
  }
  // Sparse Fisher-Yates: only displaced slots are materialized, so sampling
  // 5000 of 12M rows touches O(n) memory.
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto slot = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  SplitMix64 rng(rng_seed);
  std::vector<CorpusRecord> out;
  out.reserve(n);
  const std::size_t total = corpus.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
    const std::size_t picked = slot(j);
    swapped[j] = slot(i);
    out.push_back(corpus.records()[picked]);
  }
  return out;
}

}  // namespace memaudit
