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

#include "memaudit/audit.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "memaudit/error.hpp"
#include "memaudit/io.hpp"
#include "memaudit/records_io.hpp"

namespace memaudit {
namespace {

// Runs fn(i) for i in [0, n) on `workers` threads pulling indices in order.
// Stops handing out work once `stop` is set.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, const std::atomic<bool>& stop, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

std::string cell_key(std::string_view caption, std::string_view strategy, std::uint64_t seed) {
  std::string k;
  k.reserve(caption.size() + strategy.size() + 24);
  k.append(caption).push_back('\x1f');
  k.append(strategy).push_back('\x1f');
  k.append(std::to_string(seed));
  return k;
}

// Serialized, canonically ordered checkpoint writer. Outcomes may arrive in
// any order; lines are emitted strictly in cell order.
class OrderedCheckpoint {
 public:
  OrderedCheckpoint(const std::filesystem::path& path, std::size_t valid_bytes, bool append,
                    std::size_t flush_every)
      : flush_every_(flush_every) {
    if (path.empty()) return;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const int flags = O_WRONLY | O_CREAT | (append ? 0 : O_TRUNC);
    fd_ = ::open(path.c_str(), flags, 0644);
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open checkpoint " + path.string());
    if (append) {
      if (::ftruncate(fd_, static_cast<off_t>(valid_bytes)) != 0) {
        throw Error(ErrorCode::kIo, "cannot trim checkpoint " + path.string());
      }
      ::lseek(fd_, 0, SEEK_END);
    }
  }

  ~OrderedCheckpoint() {
    if (fd_ >= 0) {
      flush();
      ::close(fd_);
    }
  }

  void write(const std::string& line) {
    if (fd_ < 0) return;
    pending_ += line;
    pending_ += '\n';
    if (++since_flush_ >= flush_every_) flush();
  }

  void flush() {
    if (fd_ < 0 || pending_.empty()) return;
    std::size_t off = 0;
    while (off < pending_.size()) {
      const auto n = ::write(fd_, pending_.data() + off, pending_.size() - off);
      if (n < 0) throw Error(ErrorCode::kIo, "checkpoint write failed");
      off += static_cast<std::size_t>(n);
    }
    ::fsync(fd_);
    pending_.clear();
    since_flush_ = 0;
  }

 private:
  int fd_ = -1;
  std::size_t flush_every_;
  std::size_t since_flush_ = 0;
  std::string pending_;
};

void store_image(const std::filesystem::path& dir, const GeneratedImage& image,
                 const std::string& content_id) {
  if (dir.empty()) return;
  const auto path = dir / (content_id + ".img");
  if (std::filesystem::exists(path)) return;
  write_file(path, image.bytes);
}

}  // namespace

void AuditConfig::validate(const TemplateLibrary& templates) const {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "tau must satisfy 0 < tau <= 1");
  }
  if (seeds_per_run < 1) throw Error(ErrorCode::kInvalidConfig, "seeds_per_run must be >= 1");
  if (mining_seeds < 1) throw Error(ErrorCode::kInvalidConfig, "mining_seeds must be >= 1");
  if (sample_n < 1) throw Error(ErrorCode::kInvalidConfig, "sample_n must be >= 1");
  if (strategies.empty()) throw Error(ErrorCode::kInvalidConfig, "no strategies selected");
  std::unordered_set<std::string> seen;
  for (const auto& s : strategies) {
    if (!seen.insert(s).second) {
      throw Error(ErrorCode::kInvalidConfig, "strategy '" + s + "' listed twice");
    }
    templates.get(s);
  }
  if (!(failure_ceiling >= 0.0 && failure_ceiling <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "failure_ceiling must be in [0,1]");
  }
}

ScoredOutcome score_outcome(const EmbeddingVector& image_embedding,
                            const EmbeddingVector& baseline_prompt_embedding, double aesthetic,
                            const CorpusIndex& corpus, double tau) {
  const auto best = top_k_similar(image_embedding, corpus.embeddings(), 1).front();
  ScoredOutcome out;
  out.max_similarity = best.score;
  out.matched_row = best.row;
  out.matched_id = corpus.records()[best.row].record_id;
  out.relevance = cosine_similarity(image_embedding, baseline_prompt_embedding);
  out.aesthetic = aesthetic;
  out.memorized = best.score.value() >= tau;
  return out;
}

std::vector<PromptAuditRecord> assemble_records(const std::vector<GenerationOutcome>& outcomes,
                                                const std::vector<std::string>& caption_ids,
                                                const std::vector<std::string>& strategies,
                                                double tau) {
  std::map<std::pair<std::string, std::string>, std::vector<const GenerationOutcome*>> grouped;
  for (const auto& o : outcomes) grouped[{o.caption_id, o.strategy}].push_back(&o);

  std::vector<PromptAuditRecord> records;
  records.reserve(caption_ids.size() * strategies.size());
  for (const auto& c : caption_ids) {
    for (const auto& s : strategies) {
      PromptAuditRecord rec;
      rec.caption_id = c;
      rec.strategy = s;
      auto it = grouped.find({c, s});
      if (it != grouped.end()) {
        auto cells = it->second;
        std::sort(cells.begin(), cells.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
        double sum = 0.0;
        std::size_t ok = 0;
        for (const auto* o : cells) {
          rec.outcomes.push_back(*o);
          auto& stored = rec.outcomes.back();
          if (stored.failed) {
            ++rec.failed_count;
            continue;
          }
          stored.memorized = stored.max_similarity >= tau;
          if (stored.memorized) ++rec.memorized_count;
          sum += stored.max_similarity;
          ++ok;
        }
        if (ok > 0) rec.mean_similarity = quantize6(sum / static_cast<double>(ok));
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

MiningResult mine_high_risk(const CorpusIndex& corpus, BackendSession& backend,
                            const AuditConfig& cfg, const TemplateLibrary& templates,
                            std::size_t concurrency, const LogFn& log) {
  cfg.validate(templates);
  if (cfg.sample_n > corpus.size()) {
    throw Error(ErrorCode::kSampleTooLarge, "sample_n exceeds corpus size");
  }
  if (backend.descriptor().embedding_dim != corpus.embeddings().dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "backend and corpus embedding dims differ");
  }
  const auto sample = sample_captions(corpus, cfg.sample_n, cfg.rng_seed);
  const auto& baseline = templates.get(strategy_name(StrategyId::kBaseline));

  struct Probe {
    bool risky = false;
    std::size_t failed = 0;
    std::size_t attempted = 0;
  };
  std::vector<Probe> probes(sample.size());
  std::atomic<bool> never{false};
  parallel_for(sample.size(), concurrency, never, [&](std::size_t i) {
    auto& p = probes[i];
    const auto prompt = baseline.render(sample[i].caption);
    for (std::uint64_t seed = 0; seed < cfg.mining_seeds; ++seed) {
      ++p.attempted;
      try {
        const auto image = backend.generate(prompt, seed);
        const auto emb = backend.embed_image(image);
        const auto best = top_k_similar(emb, corpus.embeddings(), 1).front();
        if (best.score.value() >= cfg.tau) {
          p.risky = true;
          return;
        }
      } catch (const BackendError&) {
        ++p.failed;
      }
    }
  });

  MiningResult result;
  result.sampled = sample.size();
  std::vector<const CorpusRecord*> risky;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    result.probes += probes[i].attempted;
    result.failed_probes += probes[i].failed;
    if (probes[i].risky) {
      risky.push_back(&sample[i]);
    } else if (probes[i].failed == probes[i].attempted) {
      result.excluded_all_failed.push_back(sample[i].record_id);
      if (log) log("mine: every probe failed for '" + sample[i].record_id + "', excluded");
    }
  }
  std::sort(risky.begin(), risky.end(),
            [](auto* a, auto* b) { return a->embedding_row < b->embedding_row; });
  for (const auto* r : risky) result.caption_ids.push_back(r->record_id);
  return result;
}

std::vector<PromptAuditRecord> run_audit(const std::vector<std::string>& caption_ids,
                                         const CorpusIndex& corpus, BackendSession& backend,
                                         const AuditConfig& cfg, const RunOptions& options,
                                         RunStats* stats) {
  const TemplateLibrary& templates =
      options.templates ? *options.templates : TemplateLibrary::builtin();
  cfg.validate(templates);
  if (caption_ids.empty()) throw Error(ErrorCode::kInvalidConfig, "no captions to audit");
  std::vector<const CorpusRecord*> captions;
  for (const auto& id : caption_ids) captions.push_back(&corpus.at(id));
  if (backend.descriptor().embedding_dim != corpus.embeddings().dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "backend and corpus embedding dims differ");
  }

  struct Cell {
    std::size_t caption;
    std::size_t strategy;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  cells.reserve(captions.size() * cfg.strategies.size() * cfg.seeds_per_run);
  for (std::size_t c = 0; c < captions.size(); ++c) {
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
      for (std::uint64_t seed = 0; seed < cfg.seeds_per_run; ++seed) cells.push_back({c, s, seed});
    }
  }
  const std::size_t total = cells.size();

  std::vector<std::optional<GenerationOutcome>> results(total);
  std::size_t resumed = 0;
  std::size_t valid_bytes = 0;
  if (options.resume && !options.checkpoint_path.empty()) {
    auto existing = read_checkpoint(options.checkpoint_path);
    valid_bytes = existing.valid_bytes;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < total; ++i) {
      const auto& cell = cells[i];
      index.emplace(cell_key(captions[cell.caption]->record_id, cfg.strategies[cell.strategy],
                             cell.seed),
                    i);
    }
    for (auto& o : existing.outcomes) {
      auto it = index.find(cell_key(o.caption_id, o.strategy, o.seed));
      if (it == index.end()) {
        throw Error(ErrorCode::kFormatError,
                    "checkpoint holds a cell outside this run's configuration");
      }
      if (!results[it->second]) ++resumed;
      results[it->second] = std::move(o);
    }
    if (options.log && resumed > 0) {
      options.log("run: resuming with " + std::to_string(resumed) + " of " +
                  std::to_string(total) + " cells done");
    }
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < total; ++i) {
    if (!results[i]) pending.push_back(i);
  }

  std::atomic<std::size_t> failures{0};
  for (const auto& r : results) {
    if (r && r->failed) ++failures;
  }
  const auto failure_limit =
      static_cast<std::size_t>(std::floor(cfg.failure_ceiling * static_cast<double>(total)));

  // Baseline-prompt embeddings, one per caption, shared by every strategy.
  std::vector<bool> needs_text(captions.size(), false);
  for (auto i : pending) needs_text[cells[i].caption] = true;
  std::vector<std::optional<EmbeddingVector>> prompt_embeddings(captions.size());
  std::vector<std::string> prompt_errors(captions.size());
  const auto& baseline = templates.get(strategy_name(StrategyId::kBaseline));
  std::atomic<bool> stop{false};
  parallel_for(captions.size(), options.concurrency, stop, [&](std::size_t c) {
    if (!needs_text[c]) return;
    try {
      prompt_embeddings[c] = backend.embed_text(baseline.render(captions[c]->caption));
    } catch (const BackendError& e) {
      prompt_errors[c] = std::string(backend_error_label(e.kind()));
    }
  });

  OrderedCheckpoint checkpoint(options.checkpoint_path, valid_bytes, options.resume,
                               std::max<std::size_t>(1, options.flush_every));
  std::mutex commit_mu;
  std::size_t next_commit = 0;
  std::size_t written = 0;
  bool interrupted = false;
  std::exception_ptr fatal;

  // Emits every contiguous finished cell; a cell restored from the
  // checkpoint is already on disk and is skipped.
  std::vector<bool> on_disk(total, false);
  for (std::size_t i = 0; i < total; ++i) on_disk[i] = results[i].has_value();
  auto commit = [&] {
    while (next_commit < total && results[next_commit]) {
      if (!on_disk[next_commit]) {
        if (options.stop_after && written >= *options.stop_after) {
          interrupted = true;
          stop = true;
          return;
        }
        checkpoint.write(encode_outcome(*results[next_commit]));
        on_disk[next_commit] = true;
        ++written;
      }
      ++next_commit;
    }
  };
  {
    std::lock_guard lock(commit_mu);
    commit();
  }

  parallel_for(pending.size(), options.concurrency, stop, [&](std::size_t p) {
    const std::size_t i = pending[p];
    const auto& cell = cells[i];
    const auto& record = *captions[cell.caption];
    const auto& strategy = cfg.strategies[cell.strategy];
    GenerationOutcome out;
    out.caption_id = record.record_id;
    out.strategy = strategy;
    out.seed = cell.seed;
    try {
      if (!prompt_embeddings[cell.caption]) {
        throw BackendError(BackendErrorKind::kUnavailable,
                           "baseline prompt embedding failed: " + prompt_errors[cell.caption]);
      }
      const auto prompt = templates.get(strategy).render(record.caption);
      const auto image = backend.generate(prompt, cell.seed);
      const auto content_id = sha256_hex(image.bytes);
      store_image(options.image_dir, image, content_id);
      const auto emb = backend.embed_image(image);
      const double aes = backend.aesthetic_score(image);
      const auto scored =
          score_outcome(emb, *prompt_embeddings[cell.caption], aes, corpus, cfg.tau);
      out.image_id = content_id;
      out.max_similarity = quantize6(scored.max_similarity.value());
      out.matched_record_id = scored.matched_id;
      out.relevance = quantize6(scored.relevance.value());
      out.aesthetic = quantize6(scored.aesthetic);
      out.memorized = out.max_similarity >= cfg.tau;
    } catch (const BackendError& e) {
      out = GenerationOutcome{};
      out.caption_id = record.record_id;
      out.strategy = strategy;
      out.seed = cell.seed;
      out.failed = true;
      out.error = std::string(backend_error_label(e.kind()));
      if (failures.fetch_add(1) + 1 > failure_limit) stop = true;
    } catch (...) {
      std::lock_guard lock(commit_mu);
      if (!fatal) fatal = std::current_exception();
      stop = true;
      return;
    }
    std::lock_guard lock(commit_mu);
    results[i] = std::move(out);
    commit();
  });

  {
    std::lock_guard lock(commit_mu);
    checkpoint.flush();
  }
  if (fatal) std::rethrow_exception(fatal);
  if (failures.load() > failure_limit) {
    throw Error(ErrorCode::kFailureCeiling,
                std::to_string(failures.load()) + " of " + std::to_string(total) +
                    " cells failed, above the ceiling of " + format_fixed(cfg.failure_ceiling, 4));
  }
  if (interrupted) {
    throw Error(ErrorCode::kInterrupted,
                "stopped after " + std::to_string(written) + " new outcomes");
  }

  std::vector<GenerationOutcome> outcomes;
  outcomes.reserve(total);
  std::size_t failed_cells = 0;
  for (auto& r : results) {
    if (r->failed) ++failed_cells;
    outcomes.push_back(std::move(*r));
  }
  if (stats) *stats = {total, resumed, failed_cells};
  return assemble_records(outcomes, caption_ids, cfg.strategies, cfg.tau);
}

}  // namespace memaudit
