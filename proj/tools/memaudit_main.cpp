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

// memaudit command-line entry point.
//
// Exit codes: 0 success, 2 usage or configuration, 3 backend failure ceiling,
// 4 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <csignal>
#include <ctime>
#include <iostream>
#include <thread>

#include "memaudit/audit.hpp"
#include "memaudit/corpus.hpp"
#include "memaudit/embed_store.hpp"
#include "memaudit/error.hpp"
#include "memaudit/http_backend.hpp"
#include "memaudit/io.hpp"
#include "memaudit/mock_backend.hpp"
#include "memaudit/prompts.hpp"
#include "memaudit/records_io.hpp"
#include "memaudit/report.hpp"
#include "memaudit/rng.hpp"
#include "memaudit/run_dir.hpp"
#include "memaudit/stats.hpp"

namespace {

using namespace memaudit;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBackend = 3;
constexpr int kExitIo = 4;

constexpr const char* kVersion = "0.1.0";

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kFailureCeiling: return kExitBackend;
    case ErrorCode::kIo: return kExitIo;
    default: return kExitUsage;
  }
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void log_line(std::string_view msg) { std::cerr << msg << "\n"; }

std::size_t default_concurrency() {
  return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t in_flight(const BackendSelector& sel, std::size_t requested, std::size_t limit) {
  return sel.kind == "http" ? std::min(requested, limit) : requested;
}

std::vector<std::string> parse_strategies(const std::string& flag,
                                          const TemplateLibrary& templates) {
  if (flag == "all") {
    std::vector<std::string> out;
    for (auto id : kAllStrategies) out.emplace_back(strategy_name(id));
    return out;
  }
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= flag.size()) {
    auto comma = flag.find(',', pos);
    if (comma == std::string::npos) comma = flag.size();
    auto name = flag.substr(pos, comma - pos);
    if (!name.empty()) {
      templates.get(name);
      out.push_back(name);
    }
    pos = comma + 1;
  }
  return out;
}

struct MineFlags {
  std::string manifest;
  std::string store;
  std::string backend;
  std::size_t sample = 5000;
  double tau = kDefaultTau;
  std::uint64_t seed = 0;
  std::size_t mining_seeds = 8;
  double failure_ceiling = 0.10;
  std::size_t concurrency = default_concurrency();
  std::size_t max_in_flight = 4;
  std::string out = "high_risk_captions.json";
};

int cmd_mine(const MineFlags& f) {
  AuditConfig cfg;
  cfg.tau = f.tau;
  cfg.sample_n = f.sample;
  cfg.mining_seeds = f.mining_seeds;
  cfg.rng_seed = f.seed;
  cfg.failure_ceiling = f.failure_ceiling;
  cfg.validate();
  const auto selector = BackendSelector::parse(f.backend);
  const auto corpus = load_corpus(f.manifest, f.store);
  auto backend = open_backend(selector);
  BackendSession session(*backend);
  const auto result =
      mine_high_risk(corpus, session, cfg, TemplateLibrary::builtin(),
                     in_flight(selector, f.concurrency, f.max_in_flight), log_line);

  ordered_json out;
  out["caption_ids"] = result.caption_ids;
  out["tau"] = cfg.tau;
  out["sample_n"] = cfg.sample_n;
  out["mining_seeds"] = cfg.mining_seeds;
  out["rng_seed"] = cfg.rng_seed;
  out["criterion"] = "at least one baseline probe with max similarity >= tau";
  out["corpus"] = {{"manifest", f.manifest}, {"store", f.store}, {"digest", corpus.source_digest()}};
  out["backend"] = {{"selector", selector.str()},
                    {"model_label", session.descriptor().model_label},
                    {"embedding_dim", session.descriptor().embedding_dim}};
  out["sampled"] = result.sampled;
  out["probes"] = result.probes;
  out["failed_probes"] = result.failed_probes;
  out["excluded_all_failed"] = result.excluded_all_failed;
  write_file(f.out, out.dump(2) + "\n");
  std::cerr << "mine: " << result.caption_ids.size() << " high-risk captions of "
            << result.sampled << " sampled -> " << f.out << "\n";

  if (result.probes > 0 && static_cast<double>(result.failed_probes) >
                               cfg.failure_ceiling * static_cast<double>(result.probes)) {
    std::cerr << "mine: " << result.failed_probes << " of " << result.probes
              << " probes failed, above the failure ceiling\n";
    return kExitBackend;
  }
  return kExitOk;
}

struct RunFlags {
  std::string captions;
  std::string strategies = "all";
  std::size_t seeds = 75;
  double tau = kDefaultTau;
  std::uint64_t seed = 0;
  std::string backend;
  std::string manifest;
  std::string store;
  std::string out;
  std::string resume;
  std::string templates;
  std::size_t concurrency = default_concurrency();
  std::size_t max_in_flight = 4;
  double failure_ceiling = 0.10;
  bool keep_images = false;
  std::size_t stop_after = 0;
  std::string command_line;
};

int cmd_run(const RunFlags& f) {
  std::filesystem::path run_dir;
  RunManifest manifest;
  const bool resuming = !f.resume.empty();
  if (resuming) {
    run_dir = f.resume;
    manifest = read_run_manifest(run_dir);
  } else {
    if (f.out.empty() || f.captions.empty() || f.backend.empty() || f.manifest.empty() ||
        f.store.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "run needs --captions, --backend, --corpus-manifest, --corpus-store and --out");
    }
    run_dir = f.out;
    manifest.user_templates = f.templates;
  }

  const TemplateLibrary templates = manifest.user_templates.empty()
                                        ? TemplateLibrary::builtin()
                                        : TemplateLibrary::with_user_file(manifest.user_templates);
  if (!resuming) {
    manifest.config.tau = f.tau;
    manifest.config.seeds_per_run = f.seeds;
    manifest.config.strategies = parse_strategies(f.strategies, templates);
    manifest.config.rng_seed = f.seed;
    manifest.config.failure_ceiling = f.failure_ceiling;
    manifest.config.validate(templates);  // before touching any input files
    manifest.caption_ids = read_caption_ids(f.captions);
    manifest.corpus_manifest = std::filesystem::absolute(f.manifest).string();
    manifest.corpus_store = std::filesystem::absolute(f.store).string();
    manifest.backend_selector = f.backend;
  }
  manifest.config.validate(templates);

  const auto selector = BackendSelector::parse(manifest.backend_selector);
  const auto corpus = load_corpus(manifest.corpus_manifest, manifest.corpus_store);
  if (resuming && corpus.source_digest() != manifest.corpus_digest) {
    throw Error(ErrorCode::kInvalidConfig, "corpus changed since the run started");
  }
  auto backend = open_backend(selector, manifest.generation);
  BackendSession session(*backend);

  if (!resuming) {
    manifest.command_line = f.command_line;
    manifest.config_digest = config_digest(manifest.config, manifest.caption_ids);
    manifest.corpus_digest = corpus.source_digest();
    manifest.backend = session.descriptor();
    manifest.template_digests = templates.digests();
    manifest.version = kVersion;
    manifest.created_at = utc_now();
    std::filesystem::create_directories(run_dir);
    write_run_manifest(run_dir, manifest);
  } else if (session.descriptor().embedding_dim != manifest.backend.embedding_dim) {
    throw Error(ErrorCode::kInvalidConfig, "backend embedding_dim changed since the run started");
  }

  RunOptions opts;
  opts.concurrency = in_flight(selector, f.concurrency, f.max_in_flight);
  opts.checkpoint_path = run_dir / kOutcomesFile;
  opts.resume = resuming;
  if (f.keep_images) opts.image_dir = run_dir / kImagesDir;
  if (f.stop_after > 0) opts.stop_after = f.stop_after;
  opts.log = log_line;
  opts.templates = &templates;
  RunStats stats;
  const auto records =
      run_audit(manifest.caption_ids, corpus, session, manifest.config, opts, &stats);
  write_file(run_dir / kRecordsFile, encode_records(records));
  std::cerr << "run: " << stats.total_cells << " cells (" << stats.resumed_cells
            << " resumed, " << stats.failed_cells << " failed) -> " << run_dir.string() << "\n";
  return kExitOk;
}

struct ReportFlags {
  std::string run;
  std::string out;
  std::size_t bins = 40;
  bool svg = false;
};

int cmd_report(const ReportFlags& f) {
  const std::filesystem::path run_dir = f.run;
  const auto manifest = read_run_manifest(run_dir);
  std::vector<PromptAuditRecord> records;
  try {
    records = read_records(run_dir);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(ErrorCode::kFormatError, std::string("malformed records: ") + e.what());
  }
  ReportContext ctx;
  ctx.config = manifest.config;
  ctx.config_digest = manifest.config_digest;
  ctx.corpus_digest = manifest.corpus_digest;
  ctx.backend_label = manifest.backend.model_label + " (" + manifest.backend_selector + ")";
  ctx.bins = f.bins;
  ctx.svg = f.svg;
  const std::filesystem::path out = f.out.empty() ? run_dir : std::filesystem::path(f.out);
  write_report(out, records, ctx);
  std::cerr << "report: wrote summary.csv, correlations.json, distributions.json, report.md to "
            << out.string() << "\n";
  return kExitOk;
}

struct SynthFlags {
  std::size_t records = 100;
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  std::string manifest;
  std::string store;
  std::string mock_config;
  double rate = 0.414;
  std::size_t memorized = 0;
};

// Random unit-norm rows with captions "synthetic caption <i>".
int cmd_synth_corpus(const SynthFlags& f) {
  if (f.records == 0 || f.dim == 0) {
    throw Error(ErrorCode::kInvalidConfig, "--records and --dim must be positive");
  }
  SplitMix64 rng(f.seed);
  std::vector<CorpusRecord> records;
  std::vector<EmbeddingVector> rows;
  for (std::size_t i = 0; i < f.records; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "rec-%06zu", i);
    records.push_back({id, "synthetic caption " + std::to_string(i),
                       "images/" + std::string(id) + ".png", i});
    std::vector<double> v(f.dim);
    for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
    rows.push_back(EmbeddingVector(std::move(v)));
  }
  const auto matrix = EmbeddingMatrix::from_vectors(rows);
  write_file(f.manifest, encode_manifest(records));
  write_embedding_store(f.store, matrix);
  if (!f.mock_config.empty()) {
    ordered_json cfg;
    cfg["corpus_manifest"] = std::filesystem::absolute(f.manifest).string();
    cfg["corpus_store"] = std::filesystem::absolute(f.store).string();
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < std::min(f.memorized, records.size()); ++i) {
      ids.push_back(records[i].record_id);
    }
    cfg["memorized_caption_ids"] = ids;
    cfg["memorization_rate"] = f.rate;
    cfg["noise_seed"] = f.seed;
    write_file(f.mock_config, cfg.dump(2) + "\n");
  }
  return kExitOk;
}

volatile std::sig_atomic_t g_stop = 0;

int cmd_serve_mock(const std::string& config, const std::string& host, int port) {
  MockBackend backend(load_mock_config(config));
  BackendServer server(backend);
  const int bound = server.start(host, port);
  std::cerr << "serve-mock: listening on http://" << host << ":" << bound << "\n";
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-data memorization audit for text-to-image backends"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string command_line;
  for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

  MineFlags mine;
  auto* mine_cmd = app.add_subcommand("mine", "Find captions whose baseline generations match the corpus");
  mine_cmd->add_option("--corpus-manifest", mine.manifest, "JSON-lines corpus manifest")->required();
  mine_cmd->add_option("--corpus-store", mine.store, "MEMBED01 embedding store")->required();
  mine_cmd->add_option("--backend", mine.backend, "mock:<config> or http:<url>")->required();
  mine_cmd->add_option("--sample", mine.sample, "captions to sample")->capture_default_str();
  mine_cmd->add_option("--tau", mine.tau, "similarity threshold")->capture_default_str();
  mine_cmd->add_option("--seed", mine.seed, "sampling seed")->capture_default_str();
  mine_cmd->add_option("--mining-seeds", mine.mining_seeds, "baseline probes per caption")
      ->capture_default_str();
  mine_cmd->add_option("--failure-ceiling", mine.failure_ceiling)->capture_default_str();
  mine_cmd->add_option("--concurrency", mine.concurrency)->capture_default_str();
  mine_cmd->add_option("--max-in-flight", mine.max_in_flight, "cap for http backends")
      ->capture_default_str();
  mine_cmd->add_option("--out", mine.out)->capture_default_str();

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Generate and score every caption x strategy x seed");
  run_cmd->add_option("--captions", run.captions, "high_risk_captions.json or a JSON id array");
  run_cmd->add_option("--strategies", run.strategies, "'all' or a comma-separated list")
      ->capture_default_str();
  run_cmd->add_option("--seeds", run.seeds, "seeds per prompt")->capture_default_str();
  run_cmd->add_option("--tau", run.tau)->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "recorded run seed")->capture_default_str();
  run_cmd->add_option("--backend", run.backend);
  run_cmd->add_option("--corpus-manifest", run.manifest);
  run_cmd->add_option("--corpus-store", run.store);
  run_cmd->add_option("--out", run.out, "new run directory");
  run_cmd->add_option("--resume", run.resume, "continue an interrupted run directory");
  run_cmd->add_option("--templates", run.templates, "extra strategy templates (JSON)");
  run_cmd->add_option("--concurrency", run.concurrency)->capture_default_str();
  run_cmd->add_option("--max-in-flight", run.max_in_flight)->capture_default_str();
  run_cmd->add_option("--failure-ceiling", run.failure_ceiling)->capture_default_str();
  run_cmd->add_flag("--keep-images", run.keep_images, "retain images under <run>/images");
  run_cmd->add_option("--stop-after", run.stop_after, "stop after N new outcomes (testing)")
      ->group("");

  ReportFlags report;
  auto* report_cmd = app.add_subcommand("report", "Summaries, correlations and distributions");
  report_cmd->add_option("--run", report.run, "run directory")->required();
  report_cmd->add_option("--out", report.out, "output directory (default: the run directory)");
  report_cmd->add_option("--bins", report.bins)->capture_default_str();
  report_cmd->add_flag("--svg", report.svg, "also write SVG histograms");

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth-corpus", "Write a random synthetic corpus");
  synth_cmd->add_option("--records", synth.records)->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out-manifest", synth.manifest)->required();
  synth_cmd->add_option("--out-store", synth.store)->required();
  synth_cmd->add_option("--mock-config", synth.mock_config, "also write a mock backend config");
  synth_cmd->add_option("--memorized", synth.memorized, "first N records are memorized")
      ->capture_default_str();
  synth_cmd->add_option("--rate", synth.rate)->capture_default_str();

  std::string serve_config;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve_cmd = app.add_subcommand("serve-mock", "Serve the mock backend over HTTP");
  serve_cmd->add_option("--config", serve_config)->required();
  serve_cmd->add_option("--host", serve_host)->capture_default_str();
  serve_cmd->add_option("--port", serve_port)->capture_default_str();

  std::string render_strategy;
  std::string render_caption;
  auto* render_cmd = app.add_subcommand("render", "Print a strategy's prompt for a caption");
  render_cmd->add_option("--strategy", render_strategy)->required();
  render_cmd->add_option("--caption", render_caption)->required();

  std::string tier_name;
  auto* rec_cmd = app.add_subcommand("recommend", "Strategy for a risk tier (high|medium|low)");
  rec_cmd->add_option("--tier", tier_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*mine_cmd) return cmd_mine(mine);
    if (*run_cmd) {
      run.command_line = command_line;
      return cmd_run(run);
    }
    if (*report_cmd) return cmd_report(report);
    if (*synth_cmd) return cmd_synth_corpus(synth);
    if (*serve_cmd) return cmd_serve_mock(serve_config, serve_host, serve_port);
    if (*render_cmd) {
      std::cout << TemplateLibrary::builtin().get(render_strategy).render(render_caption) << "\n";
      return kExitOk;
    }
    if (*rec_cmd) {
      const auto tier = parse_risk_tier(tier_name);
      if (!tier) throw Error(ErrorCode::kInvalidConfig, "tier must be high, medium or low");
      std::cout << strategy_name(recommend_strategy(*tier)) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "memaudit: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const BackendError& e) {
    std::cerr << "memaudit: backend: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "memaudit: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
