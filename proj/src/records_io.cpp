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

#include "memaudit/records_io.hpp"

#include <json.hpp>

#include "memaudit/error.hpp"
#include "memaudit/io.hpp"

namespace memaudit {
namespace {

using nlohmann::json;

std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

GenerationOutcome outcome_from_json(const json& o) {
  GenerationOutcome out;
  out.caption_id = o.at("caption_id").get<std::string>();
  out.strategy = o.at("strategy").get<std::string>();
  out.seed = o.at("seed").get<std::uint64_t>();
  out.failed = o.at("failed").get<bool>();
  if (out.failed) {
    out.error = o.at("error").get<std::string>();
    return out;
  }
  out.image_id = o.at("image_id").get<std::string>();
  out.max_similarity = o.at("max_similarity").get<double>();
  out.matched_record_id = o.at("matched_record_id").get<std::string>();
  out.relevance = o.at("relevance").get<double>();
  out.aesthetic = o.at("aesthetic").get<double>();
  out.memorized = o.at("memorized").get<bool>();
  return out;
}

}  // namespace

std::string encode_outcome(const GenerationOutcome& o) {
  std::string s = "{\"caption_id\":" + quote(o.caption_id) + ",\"strategy\":" + quote(o.strategy) +
                  ",\"seed\":" + std::to_string(o.seed);
  if (o.failed) {
    s += ",\"failed\":true,\"error\":" + quote(o.error) + "}";
    return s;
  }
  s += ",\"image_id\":" + quote(o.image_id);
  s += ",\"max_similarity\":" + format_fixed(o.max_similarity);
  s += ",\"matched_record_id\":" + quote(o.matched_record_id);
  s += ",\"relevance\":" + format_fixed(o.relevance);
  s += ",\"aesthetic\":" + format_fixed(o.aesthetic);
  s += std::string(",\"memorized\":") + (o.memorized ? "true" : "false");
  s += ",\"failed\":false}";
  return s;
}

GenerationOutcome decode_outcome(std::string_view line) {
  try {
    return outcome_from_json(json::parse(line));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("outcome: ") + e.what());
  }
}

CheckpointContents read_checkpoint(const std::filesystem::path& path) {
  CheckpointContents out;
  if (!std::filesystem::exists(path)) return out;
  const std::string text = read_file(path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    // A line without its newline was torn by an interruption.
    if (eol == std::string::npos) break;
    const std::string_view line(text.data() + pos, eol - pos);
    try {
      out.outcomes.push_back(decode_outcome(line));
    } catch (const Error&) {
      break;
    }
    pos = eol + 1;
    out.valid_bytes = pos;
  }
  return out;
}

std::string encode_records(const std::vector<PromptAuditRecord>& records) {
  std::string s = "{\"records\":[";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    s += i == 0 ? "\n" : ",\n";
    s += "{\"caption_id\":" + quote(r.caption_id) + ",\"strategy\":" + quote(r.strategy);
    s += ",\"mean_similarity\":" +
         (r.mean_similarity ? format_fixed(*r.mean_similarity) : std::string("null"));
    s += ",\"memorized_count\":" + std::to_string(r.memorized_count);
    s += ",\"failed_count\":" + std::to_string(r.failed_count);
    s += ",\"outcomes\":[";
    for (std::size_t j = 0; j < r.outcomes.size(); ++j) {
      s += j == 0 ? "\n  " : ",\n  ";
      s += encode_outcome(r.outcomes[j]);
    }
    s += "]}";
  }
  s += "\n]}\n";
  return s;
}

std::vector<PromptAuditRecord> decode_records(std::string_view text) {
  std::vector<PromptAuditRecord> out;
  try {
    const auto doc = json::parse(text);
    for (const auto& r : doc.at("records")) {
      PromptAuditRecord rec;
      rec.caption_id = r.at("caption_id").get<std::string>();
      rec.strategy = r.at("strategy").get<std::string>();
      if (!r.at("mean_similarity").is_null()) {
        rec.mean_similarity = r["mean_similarity"].get<double>();
      }
      rec.memorized_count = r.at("memorized_count").get<std::size_t>();
      rec.failed_count = r.value("failed_count", std::size_t{0});
      for (const auto& o : r.at("outcomes")) rec.outcomes.push_back(outcome_from_json(o));
      if (rec.memorized_count > rec.outcomes.size()) {
        throw Error(ErrorCode::kFormatError, "memorized_count exceeds outcomes");
      }
      out.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("records: ") + e.what());
  }
  return out;
}

std::string encode_audit_config(const AuditConfig& cfg) {
  json j = {{"tau", cfg.tau},
            {"sample_n", cfg.sample_n},
            {"seeds_per_run", cfg.seeds_per_run},
            {"mining_seeds", cfg.mining_seeds},
            {"strategies", cfg.strategies},
            {"rng_seed", cfg.rng_seed},
            {"failure_ceiling", cfg.failure_ceiling}};
  return j.dump(2);
}

AuditConfig decode_audit_config(std::string_view json_text) {
  AuditConfig cfg;
  try {
    const auto j = json::parse(json_text);
    cfg.tau = j.value("tau", cfg.tau);
    cfg.sample_n = j.value("sample_n", cfg.sample_n);
    cfg.seeds_per_run = j.value("seeds_per_run", cfg.seeds_per_run);
    cfg.mining_seeds = j.value("mining_seeds", cfg.mining_seeds);
    if (j.contains("strategies")) cfg.strategies = j["strategies"].get<std::vector<std::string>>();
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    cfg.failure_ceiling = j.value("failure_ceiling", cfg.failure_ceiling);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("audit config: ") + e.what());
  }
  return cfg;
}

}  // namespace memaudit
