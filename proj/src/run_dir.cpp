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

#include "memaudit/run_dir.hpp"

#include <json.hpp>

#include <cstdlib>

#include "memaudit/error.hpp"
#include "memaudit/http_backend.hpp"
#include "memaudit/io.hpp"
#include "memaudit/mock_backend.hpp"
#include "memaudit/records_io.hpp"

namespace memaudit {

using nlohmann::json;
using nlohmann::ordered_json;

BackendSelector BackendSelector::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon + 1 >= text.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "backend must look like mock:<config-path> or http:<url>");
  }
  BackendSelector s{std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
  if (s.kind != "mock" && s.kind != "http") {
    throw Error(ErrorCode::kInvalidConfig, "unknown backend kind '" + s.kind + "'");
  }
  return s;
}

std::unique_ptr<Backend> open_backend(const BackendSelector& selector,
                                      const GenerationParams& params) {
  if (selector.kind == "mock") {
    return std::make_unique<MockBackend>(load_mock_config(selector.target));
  }
  HttpBackendOptions opts;
  opts.base_url = selector.target;
  if (const char* token = std::getenv("MEMAUDIT_TOKEN")) opts.bearer_token = token;
  opts.generation = params;
  return std::make_unique<HttpBackend>(std::move(opts));
}

std::string config_digest(const AuditConfig& cfg, const std::vector<std::string>& caption_ids) {
  Sha256 h;
  h.update(encode_audit_config(cfg));
  for (const auto& id : caption_ids) {
    h.update("\n");
    h.update(id);
  }
  return h.hex_digest();
}

std::string encode_run_manifest(const RunManifest& m) {
  ordered_json j;
  j["version"] = m.version;
  j["created_at"] = m.created_at;
  j["command_line"] = m.command_line;
  j["config"] = ordered_json::parse(encode_audit_config(m.config));
  j["config_digest"] = m.config_digest;
  j["corpus"] = {{"manifest", m.corpus_manifest},
                 {"store", m.corpus_store},
                 {"digest", m.corpus_digest}};
  j["backend"] = {{"selector", m.backend_selector},
                  {"kind", m.backend.kind},
                  {"endpoint", m.backend.endpoint},
                  {"model_label", m.backend.model_label},
                  {"embedding_dim", m.backend.embedding_dim},
                  {"deterministic", m.backend.deterministic}};
  j["generation"] = {{"width", m.generation.width},
                     {"height", m.generation.height},
                     {"steps", m.generation.steps},
                     {"guidance", m.generation.guidance},
                     {"assumed_defaults", true}};
  j["templates"] = {{"user_file", m.user_templates}, {"digests", m.template_digests}};
  j["caption_ids"] = m.caption_ids;
  return j.dump(2) + "\n";
}

RunManifest decode_run_manifest(std::string_view json_text) {
  RunManifest m;
  try {
    const auto j = json::parse(json_text);
    m.version = j.value("version", "");
    m.created_at = j.value("created_at", "");
    m.command_line = j.value("command_line", "");
    m.config = decode_audit_config(j.at("config").dump());
    m.config_digest = j.value("config_digest", "");
    const auto& c = j.at("corpus");
    m.corpus_manifest = c.at("manifest").get<std::string>();
    m.corpus_store = c.at("store").get<std::string>();
    m.corpus_digest = c.value("digest", "");
    const auto& b = j.at("backend");
    m.backend_selector = b.at("selector").get<std::string>();
    m.backend.kind = b.value("kind", "");
    m.backend.endpoint = b.value("endpoint", "");
    m.backend.model_label = b.value("model_label", "");
    m.backend.embedding_dim = b.value("embedding_dim", std::size_t{0});
    m.backend.deterministic = b.value("deterministic", false);
    if (j.contains("generation")) {
      const auto& g = j["generation"];
      m.generation.width = g.value("width", m.generation.width);
      m.generation.height = g.value("height", m.generation.height);
      m.generation.steps = g.value("steps", m.generation.steps);
      m.generation.guidance = g.value("guidance", m.generation.guidance);
    }
    if (j.contains("templates")) {
      m.user_templates = j["templates"].value("user_file", "");
      m.template_digests =
          j["templates"].value("digests", std::map<std::string, std::string>{});
    }
    m.caption_ids = j.at("caption_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("run manifest: ") + e.what());
  }
  return m;
}

RunManifest read_run_manifest(const std::filesystem::path& run_dir) {
  return decode_run_manifest(read_file(run_dir / kConfigFile));
}

void write_run_manifest(const std::filesystem::path& run_dir, const RunManifest& m) {
  const auto path = run_dir / kConfigFile;
  if (std::filesystem::exists(path)) {
    throw Error(ErrorCode::kIo, path.string() + " exists; use --resume to continue that run");
  }
  write_file(path, encode_run_manifest(m));
}

std::vector<PromptAuditRecord> read_records(const std::filesystem::path& run_dir) {
  return decode_records(read_file(run_dir / kRecordsFile));
}

std::vector<std::string> read_caption_ids(const std::filesystem::path& path) {
  try {
    const auto j = json::parse(read_file(path));
    if (j.is_array()) return j.get<std::vector<std::string>>();
    return j.at("caption_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, path.string() + ": " + e.what());
  }
}

}  // namespace memaudit
