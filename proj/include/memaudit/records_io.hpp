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

// On-disk forms of audit outcomes, records and run configuration. Scores are
// written with exactly six decimals.

#ifndef MEMAUDIT_RECORDS_IO_HPP_
#define MEMAUDIT_RECORDS_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "memaudit/audit.hpp"

namespace memaudit {

// One line, no trailing newline.
std::string encode_outcome(const GenerationOutcome& outcome);
// Throws FormatError.
GenerationOutcome decode_outcome(std::string_view line);

struct CheckpointContents {
  std::vector<GenerationOutcome> outcomes;
  // Byte length of the well-formed prefix; a torn final line is excluded.
  std::size_t valid_bytes = 0;
};
CheckpointContents read_checkpoint(const std::filesystem::path& path);

std::string encode_records(const std::vector<PromptAuditRecord>& records);
std::vector<PromptAuditRecord> decode_records(std::string_view text);

std::string encode_audit_config(const AuditConfig& cfg);
AuditConfig decode_audit_config(std::string_view json_text);

}  // namespace memaudit

#endif  // MEMAUDIT_RECORDS_IO_HPP_
