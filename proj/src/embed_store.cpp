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

#include "memaudit/embed_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "memaudit/error.hpp"
#include "memaudit/io.hpp"

namespace memaudit {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(std::string_view in, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return value;
}

}  // namespace

std::string encode_embedding_store(const EmbeddingMatrix& matrix) {
  std::string out;
  out.reserve(kStoreHeaderSize + matrix.storage().size() * 4);
  out.append(kStoreMagic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  put_le<std::uint64_t>(out, matrix.rows());
  for (float x : matrix.storage()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  return out;
}

EmbeddingMatrix decode_embedding_store(std::string_view bytes) {
  if (bytes.size() < kStoreHeaderSize) {
    throw Error(ErrorCode::kFormatError, "embedding store shorter than its header");
  }
  if (bytes.substr(0, kStoreMagic.size()) != kStoreMagic) {
    throw Error(ErrorCode::kFormatError, "bad embedding store magic");
  }
  const auto dim = get_le<std::uint32_t>(bytes, 8);
  const auto rows = get_le<std::uint64_t>(bytes, 12);
  if (dim == 0) throw Error(ErrorCode::kFormatError, "embedding store declares dim 0");
  const std::uint64_t payload = bytes.size() - kStoreHeaderSize;
  if (rows > payload / 4 / dim) {
    throw Error(ErrorCode::kFormatError, "embedding store payload is truncated");
  }
  if (rows * dim * 4 != payload) {
    throw Error(ErrorCode::kFormatError, "embedding store has trailing bytes");
  }
  std::vector<float> storage(rows * dim);
  for (std::size_t i = 0; i < storage.size(); ++i) {
    storage[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, kStoreHeaderSize + 4 * i));
  }
  return EmbeddingMatrix(rows, dim, std::move(storage));
}

EmbeddingMatrix read_embedding_store(const std::filesystem::path& path) {
  return decode_embedding_store(read_file(path));
}

void write_embedding_store(const std::filesystem::path& path, const EmbeddingMatrix& matrix) {
  write_file(path, encode_embedding_store(matrix));
}

}  // namespace memaudit
