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

// The two-phase audit: mine high-risk captions from a corpus sample, then
// generate every (caption, strategy, seed) cell and score it against the
// full corpus.

#ifndef MEMAUDIT_AUDIT_HPP_
#define MEMAUDIT_AUDIT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memaudit/backend.hpp"
#include "memaudit/corpus.hpp"
#include "memaudit/prompts.hpp"
#include "memaudit/vector.hpp"

namespace memaudit {

inline constexpr double kDefaultTau = 0.85;

struct AuditConfig {
  double tau = kDefaultTau;
  std::size_t sample_n = 5000;
  std::size_t seeds_per_run = 75;
  // Baseline generations per sampled caption while mining.
  std::size_t mining_seeds = 8;
  std::vector<std::string> strategies = {"baseline", "task_instruction", "negation",
                                         "chain_of_thought"};
  std::uint64_t rng_seed = 0;
  // Fraction of failed cells above which a run aborts.
  double failure_ceiling = 0.10;

  // Throws InvalidConfig (and UnknownStrategy for names not in `templates`).
  void validate(const TemplateLibrary& templates = TemplateLibrary::builtin()) const;
};

struct GenerationOutcome {
  std::string caption_id;
  std::string strategy;
  std::uint64_t seed = 0;
  std::string image_id;
  double max_similarity = 0.0;
  std::string matched_record_id;
  double relevance = 0.0;
  double aesthetic = 0.0;
  bool memorized = false;
  bool failed = false;
  std::string error;

  friend bool operator==(const GenerationOutcome&, const GenerationOutcome&) = default;
};

struct PromptAuditRecord {
  std::string caption_id;
  std::string strategy;
  std::vector<GenerationOutcome> outcomes;
  // Over non-failed outcomes; empty when every cell failed.
  std::optional<double> mean_similarity;
  std::size_t memorized_count = 0;
  std::size_t failed_count = 0;

  friend bool operator==(const PromptAuditRecord&, const PromptAuditRecord&) = default;
};

struct ScoredOutcome {
  SimilarityScore max_similarity;
  std::size_t matched_row = 0;
  std::string matched_id;
  SimilarityScore relevance;
  double aesthetic = 0.0;
  bool memorized = false;
};

// Nearest corpus match, relevance to the baseline prompt and the tau
// predicate (inclusive). Throws DimensionMismatch.
ScoredOutcome score_outcome(const EmbeddingVector& image_embedding,
                            const EmbeddingVector& baseline_prompt_embedding, double aesthetic,
                            const CorpusIndex& corpus, double tau);

// Builds one record per (caption, strategy) in canonical order from outcomes
// in any order. Memorized counts use `tau` on the stored similarities.
std::vector<PromptAuditRecord> assemble_records(const std::vector<GenerationOutcome>& outcomes,
                                                const std::vector<std::string>& caption_ids,
                                                const std::vector<std::string>& strategies,
                                                double tau);

using LogFn = std::function<void(std::string_view)>;

struct MiningResult {
  std::vector<std::string> caption_ids;  // corpus order
  std::size_t sampled = 0;
  std::size_t probes = 0;
  std::size_t failed_probes = 0;
  std::vector<std::string> excluded_all_failed;
};

MiningResult mine_high_risk(const CorpusIndex& corpus, BackendSession& backend,
                            const AuditConfig& cfg,
                            const TemplateLibrary& templates = TemplateLibrary::builtin(),
                            std::size_t concurrency = 1, const LogFn& log = {});

struct RunOptions {
  std::size_t concurrency = 1;
  // Append-only JSON-lines checkpoint; empty disables checkpointing.
  std::filesystem::path checkpoint_path;
  // Skip cells already present in the checkpoint.
  bool resume = false;
  // Content-addressed image retention; empty disables it.
  std::filesystem::path image_dir;
  // Lines per fsync batch.
  std::size_t flush_every = 256;
  // Stop with Error(kInterrupted) once this many new outcomes are persisted.
  std::optional<std::size_t> stop_after;
  LogFn log;
  const TemplateLibrary* templates = nullptr;
};

struct RunStats {
  std::size_t total_cells = 0;
  std::size_t resumed_cells = 0;
  std::size_t failed_cells = 0;
};

std::vector<PromptAuditRecord> run_audit(const std::vector<std::string>& caption_ids,
                                         const CorpusIndex& corpus, BackendSession& backend,
                                         const AuditConfig& cfg, const RunOptions& options = {},
                                         RunStats* stats = nullptr);

}  // namespace memaudit

#endif  // MEMAUDIT_AUDIT_HPP_
