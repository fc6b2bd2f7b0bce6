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

#include <gtest/gtest.h>

#include <cmath>

#include "memaudit/error.hpp"
#include "memaudit/io.hpp"
#include "memaudit/mock_backend.hpp"
#include "memaudit/records_io.hpp"
#include "test_util.hpp"

namespace memaudit {
namespace {

using testing::TempDir;

struct Rig {
  explicit Rig(MockModelConfig cfg) : mock(std::move(cfg)), session(mock) {}
  MockBackend mock;
  BackendSession session;
};

MockModelConfig mock_config(std::set<std::string> memorized, double rate = 1.0,
                            std::size_t rows = 10) {
  MockModelConfig cfg;
  cfg.corpus = testing::random_corpus(rows, 32, 21);
  cfg.memorized_caption_ids = std::move(memorized);
  cfg.memorization_rate = rate;
  cfg.reference_seeds = 10;
  cfg.noise_seed = 3;
  return cfg;
}

AuditConfig small_config(std::size_t seeds = 10) {
  AuditConfig cfg;
  cfg.seeds_per_run = seeds;
  cfg.sample_n = 10;
  return cfg;
}

TEST(ScoreOutcomeTest, ExactThresholdIsInclusive) {
  const CorpusIndex corpus({{"r0", "x", "", 0}}, EmbeddingMatrix(1, 3, {1, 0, 0}), "");
  const EmbeddingVector at(std::vector<double>{0.85, std::sqrt(1 - 0.7225), 0});
  const auto s = score_outcome(at, at, 5.0, corpus, 0.85);
  EXPECT_NEAR(s.max_similarity.value(), 0.85, 1e-15);
  EXPECT_TRUE(s.memorized);
  EXPECT_EQ(s.matched_id, "r0");
  const EmbeddingVector below(std::vector<double>{0.849999, std::sqrt(1 - 0.849999 * 0.849999), 0});
  EXPECT_FALSE(score_outcome(below, below, 5.0, corpus, 0.85).memorized);
}

TEST(ScoreOutcomeTest, PicksNearestRowAndRelevance) {
  const CorpusIndex corpus({{"a", "x", "", 0}, {"b", "y", "", 1}},
                           EmbeddingMatrix(2, 2, {1, 0, 0, 1}), "");
  const auto img = EmbeddingVector::unit({0.6, 0.8});
  const auto txt = EmbeddingVector::unit({1, 0});
  const auto s = score_outcome(img, txt, 4.0, corpus, 0.85);
  EXPECT_EQ(s.matched_id, "b");
  EXPECT_NEAR(s.max_similarity.value(), 0.8, 1e-7);
  EXPECT_NEAR(s.relevance.value(), 0.6, 1e-12);
  EXPECT_FALSE(s.memorized);
  EXPECT_THROW(score_outcome(EmbeddingVector::unit({1, 0, 0}), txt, 4.0, corpus, 0.85), Error);
}

// Random unit images against 100 unrelated rows at dim 512: a true
// non-match essentially never clears 0.85.
TEST(ScoreOutcomeTest, RandomImagesAreNotMemorized) {
  std::mt19937_64 rng(99);
  std::vector<CorpusRecord> recs;
  for (std::size_t i = 0; i < 100; ++i) recs.push_back({"r" + std::to_string(i), "c", "", i});
  const CorpusIndex corpus(std::move(recs), testing::random_matrix(rng, 100, 512), "");
  int hits = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto img = testing::random_unit(rng, 512);
    hits += score_outcome(img, img, 5.0, corpus, 0.85).memorized;
  }
  EXPECT_EQ(hits, 0);
}

TEST(MineTest, FindsTheMemorizedCaption) {
  Rig rig(mock_config({"c1"}));
  auto cfg = small_config();
  const auto r = mine_high_risk(*rig.mock.config().corpus, rig.session, cfg);
  EXPECT_EQ(r.caption_ids, (std::vector<std::string>{"c1"}));
  EXPECT_EQ(r.sampled, 10u);
  // Probing a caption stops at its first hit; c1 hits on seed 0.
  EXPECT_EQ(r.probes, 9u * cfg.mining_seeds + 1);
  EXPECT_EQ(rig.mock.calls().generate, r.probes);
}

TEST(MineTest, OutputInCorpusOrderAndDeterministic) {
  Rig a(mock_config({"c7", "c2", "c5"}, 1.0, 30));
  Rig b(mock_config({"c7", "c2", "c5"}, 1.0, 30));
  auto cfg = small_config();
  cfg.sample_n = 30;
  const auto ra = mine_high_risk(*a.mock.config().corpus, a.session, cfg, TemplateLibrary::builtin(), 3);
  const auto rb = mine_high_risk(*b.mock.config().corpus, b.session, cfg);
  EXPECT_EQ(ra.caption_ids, (std::vector<std::string>{"c2", "c5", "c7"}));
  EXPECT_EQ(ra.caption_ids, rb.caption_ids);
}

TEST(RunAuditTest, SingleCellSmoke) {
  Rig rig(mock_config({"c1"}));
  auto cfg = small_config(1);
  cfg.strategies = {"baseline"};
  const auto recs = run_audit({"c1"}, *rig.mock.config().corpus, rig.session, cfg);
  ASSERT_EQ(recs.size(), 1u);
  ASSERT_EQ(recs[0].outcomes.size(), 1u);
  const auto& o = recs[0].outcomes[0];
  EXPECT_EQ(o.caption_id, "c1");
  EXPECT_EQ(o.strategy, "baseline");
  EXPECT_EQ(o.seed, 0u);
  EXPECT_TRUE(o.memorized);
  EXPECT_EQ(o.matched_record_id, "c1");
  EXPECT_EQ(o.max_similarity, 1.0);
  EXPECT_EQ(o.aesthetic, 6.25);
  EXPECT_EQ(recs[0].memorized_count, 1u);
}

TEST(RunAuditTest, CountIdentityAndCanonicalOrder) {
  Rig rig(mock_config({"c1", "c4"}, 0.5));
  const auto cfg = small_config(10);
  const std::vector<std::string> caps = {"c4", "c1", "c8"};
  const auto recs = run_audit(caps, *rig.mock.config().corpus, rig.session, cfg, {.concurrency = 3});
  ASSERT_EQ(recs.size(), caps.size() * 4);
  std::size_t total = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].caption_id, caps[i / 4]);
    EXPECT_EQ(recs[i].strategy, cfg.strategies[i % 4]);
    ASSERT_EQ(recs[i].outcomes.size(), 10u);
    for (std::size_t s = 0; s < 10; ++s) EXPECT_EQ(recs[i].outcomes[s].seed, s);
    total += recs[i].outcomes.size();
  }
  EXPECT_EQ(total, caps.size() * 4 * 10);
  // One baseline text embedding per caption, shared by all strategies.
  EXPECT_EQ(rig.mock.calls().embed_text, caps.size());
  // Memorized counts follow the mock's seed rule (rate .5, S=10 -> 5 seeds,
  // scaled per strategy) and are zero for the unmemorized caption.
  EXPECT_EQ(recs[0].memorized_count, 5u);
  for (std::size_t i = 8; i < 12; ++i) EXPECT_EQ(recs[i].memorized_count, 0u);
}

TEST(RunAuditTest, FailuresAreIsolated) {
  auto mc = mock_config({"c1"});
  mc.rejected_seeds = {3};
  Rig rig(mc);
  RunStats stats;
  const auto recs = run_audit({"c1", "c2"}, *rig.mock.config().corpus, rig.session,
                              small_config(10), {}, &stats);
  EXPECT_EQ(stats.total_cells, 80u);
  EXPECT_EQ(stats.failed_cells, 8u);
  for (const auto& r : recs) {
    EXPECT_EQ(r.failed_count, 1u);
    EXPECT_TRUE(r.outcomes[3].failed);
    EXPECT_FALSE(r.outcomes[3].error.empty());
    EXPECT_FALSE(r.outcomes[4].failed);
    EXPECT_TRUE(r.mean_similarity.has_value());
  }
}

TEST(RunAuditTest, FailureCeilingAborts) {
  auto mc = mock_config({"c1"});
  mc.rejected_seeds = {3, 4};
  Rig rig(mc);
  try {
    run_audit({"c1"}, *rig.mock.config().corpus, rig.session, small_config(10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFailureCeiling);
  }
}

TEST(RunAuditTest, DeterministicAcrossConcurrency) {
  Rig a(mock_config({"c1", "c2"}, 0.4)), b(mock_config({"c1", "c2"}, 0.4));
  const std::vector<std::string> caps = {"c1", "c2", "c3"};
  const auto ra = run_audit(caps, *a.mock.config().corpus, a.session, small_config(), {.concurrency = 1});
  const auto rb = run_audit(caps, *b.mock.config().corpus, b.session, small_config(), {.concurrency = 4});
  EXPECT_EQ(ra, rb);
}

TEST(RunAuditTest, TauMonotonicity) {
  Rig rig(mock_config({"c1", "c2"}, 0.4));
  const std::vector<std::string> caps = {"c1", "c2", "c3"};
  std::size_t prev = SIZE_MAX;
  for (double tau : {0.3, 0.5, 0.7, 0.85, 0.95, 1.0}) {
    auto cfg = small_config();
    cfg.tau = tau;
    std::size_t n = 0;
    for (const auto& r : run_audit(caps, *rig.mock.config().corpus, rig.session, cfg)) {
      n += r.memorized_count;
    }
    EXPECT_LE(n, prev) << tau;
    prev = n;
  }
}

TEST(RunAuditTest, ResumeMatchesUninterruptedRun) {
  TempDir dir;
  const std::vector<std::string> caps = {"c1", "c2", "c5"};
  {
    Rig rig(mock_config({"c1", "c5"}, 0.6));
    run_audit(caps, *rig.mock.config().corpus, rig.session, small_config(),
              {.checkpoint_path = dir / "full.jsonl", .flush_every = 7});
  }
  {
    Rig rig(mock_config({"c1", "c5"}, 0.6));
    try {
      run_audit(caps, *rig.mock.config().corpus, rig.session, small_config(),
                {.checkpoint_path = dir / "part.jsonl", .flush_every = 7, .stop_after = 50});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInterrupted);
    }
  }
  // A crash mid-write leaves a torn line behind.
  write_file(dir / "part.jsonl", read_file(dir / "part.jsonl") + R"({"caption_id":"c2","stra)");
  Rig rig(mock_config({"c1", "c5"}, 0.6));
  RunStats stats;
  const auto recs = run_audit(caps, *rig.mock.config().corpus, rig.session, small_config(),
                              {.checkpoint_path = dir / "part.jsonl", .resume = true}, &stats);
  EXPECT_GE(stats.resumed_cells, 49u);
  EXPECT_EQ(stats.total_cells, 120u);
  EXPECT_LT(rig.mock.calls().generate, 120u);
  EXPECT_EQ(read_file(dir / "part.jsonl"), read_file(dir / "full.jsonl"));
}

TEST(RunAuditTest, KeepsImagesContentAddressed) {
  TempDir dir;
  Rig rig(mock_config({"c1"}));
  auto cfg = small_config(2);
  cfg.strategies = {"baseline"};
  const auto recs = run_audit({"c1", "c2"}, *rig.mock.config().corpus, rig.session, cfg,
                              {.image_dir = dir / "images"});
  for (const auto& r : recs) {
    for (const auto& o : r.outcomes) {
      const auto p = dir / "images" / (o.image_id + ".img");
      ASSERT_TRUE(std::filesystem::exists(p));
      EXPECT_EQ(sha256_hex(read_file(p)), o.image_id);
    }
  }
}

TEST(AuditConfigTest, Validation) {
  AuditConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.tau = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.seeds_per_run = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.strategies = {"nope"};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.strategies = {};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(AssembleRecordsTest, OrderIndependentAndRecountsWithTau) {
  std::vector<GenerationOutcome> outs;
  for (std::uint64_t s = 0; s < 3; ++s) {
    GenerationOutcome o;
    o.caption_id = "a";
    o.strategy = "baseline";
    o.seed = 2 - s;
    o.max_similarity = 0.8 + 0.05 * static_cast<double>(s);
    outs.push_back(o);
  }
  const auto recs = assemble_records(outs, {"a"}, {"baseline"}, 0.85);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].outcomes[0].seed, 0u);
  EXPECT_EQ(recs[0].memorized_count, 2u);
  EXPECT_NEAR(*recs[0].mean_similarity, 0.85, 1e-12);
}

}  // namespace
}  // namespace memaudit
