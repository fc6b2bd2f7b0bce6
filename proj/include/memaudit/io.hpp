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

// Small filesystem and hashing helpers shared by the stores.

#ifndef MEMAUDIT_IO_HPP_
#define MEMAUDIT_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace memaudit {

// Both throw Error(kIo) on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Incremental SHA-256 for hashing several inputs as one stream.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  std::string hex_digest();

 private:
  struct State;
  State* state_;
};

// Fixed-point rendering used for every score written to disk.
std::string format_fixed(double value, int decimals = 6);
// Round-trips `value` through its 6-decimal text form.
double quantize6(double value);

}  // namespace memaudit

#endif  // MEMAUDIT_IO_HPP_
