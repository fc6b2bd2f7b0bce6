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

// MEMBED01 binary embedding store.
//
// Layout, all little-endian:
//   bytes 0..7    magic "MEMBED01"
//   bytes 8..11   dim, uint32
//   bytes 12..19  row count, uint64
//   then rows*dim IEEE-754 binary32 values, row-major.

#ifndef MEMAUDIT_EMBED_STORE_HPP_
#define MEMAUDIT_EMBED_STORE_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "memaudit/vector.hpp"

namespace memaudit {

inline constexpr std::string_view kStoreMagic = "MEMBED01";
inline constexpr std::size_t kStoreHeaderSize = 20;

std::string encode_embedding_store(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embedding_store(std::string_view bytes);

EmbeddingMatrix read_embedding_store(const std::filesystem::path& path);
void write_embedding_store(const std::filesystem::path& path, const EmbeddingMatrix& matrix);

}  // namespace memaudit

#endif  // MEMAUDIT_EMBED_STORE_HPP_
