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

// Self-describing run directories:
//   config.json     audit config, backend, corpus and template digests
//   outcomes.jsonl  checkpoint, one outcome per line in canonical cell order
//   records.json    per (caption, strategy) records
//   images/         content-addressed generations (optional)

#ifndef MEMAUDIT_RUN_DIR_HPP_
#define MEMAUDIT_RUN_DIR_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memaudit/audit.hpp"
#include "memaudit/backend.hpp"

namespace memaudit {

inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kOutcomesFile = "outcomes.jsonl";
inline constexpr const char* kRecordsFile = "records.json";
inline constexpr const char* kImagesDir = "images";

// `mock:<config-path>` or `http:<url>`. Throws InvalidConfig.
struct BackendSelector {
  std::string kind;
  std::string target;

  static BackendSelector parse(std::string_view text);
  std::string str() const { return kind + ":" + target; }
};

// The http backend picks up MEMAUDIT_TOKEN as its bearer token.
std::unique_ptr<Backend> open_backend(const BackendSelector& selector,
                                      const GenerationParams& params = {});

struct RunManifest {
  std::string command_line;
  AuditConfig config;
  std::string config_digest;
  std::string corpus_manifest;
  std::string corpus_store;
  std::string corpus_digest;
  std::string backend_selector;
  BackendDescriptor backend;
  GenerationParams generation;
  std::map<std::string, std::string> template_digests;
  std::string user_templates;  // path, empty for built-ins only
  std::vector<std::string> caption_ids;
  std::string version;
  std::string created_at;
};

std::string config_digest(const AuditConfig& cfg, const std::vector<std::string>& caption_ids);

std::string encode_run_manifest(const RunManifest& m);
RunManifest decode_run_manifest(std::string_view json_text);
RunManifest read_run_manifest(const std::filesystem::path& run_dir);
// Refuses to overwrite an existing manifest.
void write_run_manifest(const std::filesystem::path& run_dir, const RunManifest& m);

std::vector<PromptAuditRecord> read_records(const std::filesystem::path& run_dir);

// Reads captions from a mining output or a bare JSON array of ids.
std::vector<std::string> read_caption_ids(const std::filesystem::path& path);

}  // namespace memaudit

#endif  // MEMAUDIT_RUN_DIR_HPP_
