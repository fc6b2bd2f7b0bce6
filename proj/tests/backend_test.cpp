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

#include "memaudit/backend.hpp"

#include <gtest/gtest.h>

#include "memaudit/error.hpp"
#include "memaudit/mock_backend.hpp"
#include "memaudit/prompts.hpp"
#include "test_util.hpp"

namespace memaudit {
namespace {

MockModelConfig mock_config(double rate = 1.0) {
  MockModelConfig cfg;
  cfg.corpus = testing::random_corpus(10, 32, 11);
  cfg.memorized_caption_ids = {"c1"};
  cfg.memorization_rate = rate;
  cfg.strategy_multipliers = {};
  cfg.noise_seed = 5;
  return cfg;
}

TEST(MockBackendTest, SeedCountsUseCeil) {
  EXPECT_EQ(memorized_seed_count(0.2, 75), 15u);
  EXPECT_EQ(memorized_seed_count(0.414, 75), 32u);
  EXPECT_EQ(memorized_seed_count(0.204, 75), 16u);
  EXPECT_EQ(memorized_seed_count(0.348, 75), 27u);
  EXPECT_EQ(memorized_seed_count(0.096, 75), 8u);
  EXPECT_EQ(memorized_seed_count(0.0, 75), 0u);
  EXPECT_EQ(memorized_seed_count(1.0, 75), 75u);
}

TEST(MockBackendTest, MemorizedImageEmbedsToCorpusRow) {
  MockBackend mock(mock_config());
  const auto img = mock.generate(render_prompt(StrategyId::kBaseline, "caption 1"), 3);
  const auto e = mock.embed_image(img);
  EXPECT_NEAR(cosine_similarity(e, mock.config().corpus->embedding_of(mock.config().corpus->at("c1"))).value(), 1.0, 1e-6);
  EXPECT_EQ(mock.aesthetic_score(img), 6.25);
  EXPECT_EQ(img.image_id, sha256_hex(img.bytes));
}

TEST(MockBackendTest, RateSelectsExactlyThatManySeeds) {
  MockBackend mock(mock_config(0.2));
  const auto prompt = render_prompt(StrategyId::kBaseline, "caption 1");
  int hits = 0;
  for (std::uint64_t s = 0; s < 75; ++s) {
    hits += mock.generate(prompt, s).bytes.find("kind=memorized") != std::string::npos;
  }
  EXPECT_EQ(hits, 15);
}

TEST(MockBackendTest, StrategyMultiplierApplies) {
  auto cfg = mock_config(0.5);
  cfg.strategy_multipliers = {{"negation", 0.0}};
  MockBackend mock(cfg);
  for (std::uint64_t s = 0; s < 75; ++s) {
    const auto img = mock.generate(render_prompt(StrategyId::kNegation, "caption 1"), s);
    EXPECT_EQ(img.bytes.find("kind=memorized"), std::string::npos);
  }
}

TEST(MockBackendTest, DeterministicAndSeedSensitive) {
  MockBackend a(mock_config()), b(mock_config());
  const auto p = render_prompt(StrategyId::kBaseline, "caption 4");
  EXPECT_EQ(a.generate(p, 1).image_id, b.generate(p, 1).image_id);
  EXPECT_NE(a.generate(p, 1).image_id, a.generate(p, 2).image_id);
  const auto e1 = a.embed_image(a.generate(p, 1));
  const auto e2 = b.embed_image(b.generate(p, 1));
  EXPECT_EQ(e1, e2);
  EXPECT_TRUE(e1.normalized());
  const double aes = a.aesthetic_score(a.generate(p, 9));
  EXPECT_GE(aes, 4.5);
  EXPECT_LE(aes, 6.5);
}

TEST(MockBackendTest, TextEmbeddingTracksPairedImage) {
  MockBackend mock(mock_config());
  const auto& corpus = *mock.config().corpus;
  for (const auto& r : corpus.records()) {
    const auto t = mock.embed_text(render_prompt(StrategyId::kBaseline, r.caption));
    EXPECT_GE(cosine_similarity(t, corpus.embedding_of(r)).value(), 0.9) << r.record_id;
  }
}

TEST(MockBackendTest, EmptyInputAndRejectedSeed) {
  auto cfg = mock_config();
  cfg.rejected_seeds = {13};
  MockBackend mock(cfg);
  try {
    mock.generate("", 0);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kEmptyInput);
  }
  try {
    mock.generate("x", 13);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kRejected);
    EXPECT_FALSE(e.retryable());
  }
  EXPECT_THROW(mock.embed_text(""), BackendError);
  GeneratedImage junk;
  junk.bytes = "PNG....";
  EXPECT_THROW(mock.embed_image(junk), BackendError);
}

TEST(MockBackendTest, ConfigValidation) {
  auto cfg = mock_config();
  cfg.memorized_caption_ids = {"missing"};
  EXPECT_THROW(MockBackend{cfg}, Error);
  cfg = mock_config();
  cfg.memorization_rate = 1.5;
  EXPECT_THROW(MockBackend{cfg}, Error);
}

TEST(MockBackendTest, LoadsProtocolFixtureConfig) {
  const auto cfg = load_mock_config(testing::fixture("protocol/mock.json"));
  EXPECT_EQ(cfg.memorized_caption_ids, (std::set<std::string>{"r0"}));
  EXPECT_EQ(cfg.model_label, "protocol-fixture");
  EXPECT_TRUE(cfg.rejected_seeds.contains(13));
}

// Fails `failures` times with the given kind, then succeeds.
class Flaky {
 public:
  Flaky(int failures, BackendErrorKind kind) : left_(failures), kind_(kind) {}
  int operator()() {
    ++calls_;
    if (left_-- > 0) throw BackendError(kind_, "flaky");
    return 42;
  }
  int calls() const { return calls_; }

 private:
  int left_;
  BackendErrorKind kind_;
  int calls_ = 0;
};

TEST(RetryTest, BackoffSchedule) {
  RetryPolicy p;
  EXPECT_EQ(backoff_delay(p, 1).count(), 200);
  EXPECT_EQ(backoff_delay(p, 2).count(), 400);
  EXPECT_EQ(backoff_delay(p, 3).count(), 800);
  EXPECT_EQ(backoff_delay(p, 10).count(), 5000);
}

TEST(RetryTest, RetriesTransientThenSucceeds) {
  Flaky f(3, BackendErrorKind::kUnavailable);
  std::vector<long> slept;
  const int v = with_retry(RetryPolicy{}, [&] { return f(); },
                           [&](std::chrono::milliseconds d) { slept.push_back(d.count()); });
  EXPECT_EQ(v, 42);
  EXPECT_EQ(f.calls(), 4);
  EXPECT_EQ(slept, (std::vector<long>{200, 400, 800}));
}

TEST(RetryTest, GivesUpAfterMaxRetries) {
  Flaky f(100, BackendErrorKind::kTimeout);
  EXPECT_THROW(with_retry(RetryPolicy{}, [&] { return f(); }, [](auto) {}), BackendError);
  EXPECT_EQ(f.calls(), 5);
}

TEST(RetryTest, NonRetryableFailsFast) {
  Flaky f(1, BackendErrorKind::kRejected);
  EXPECT_THROW(with_retry(RetryPolicy{}, [&] { return f(); }, [](auto) {}), BackendError);
  EXPECT_EQ(f.calls(), 1);
}

// Reports one dimension, returns another.
class LyingBackend : public Backend {
 public:
  BackendDescriptor handshake() override { return {"mock", "", 4, "liar", true}; }
  GeneratedImage generate(const std::string& p, std::uint64_t s) override {
    return {"id", "b", p, s};
  }
  EmbeddingVector embed_image(const GeneratedImage&) override { return EmbeddingVector::unit({1, 0, 0}); }
  EmbeddingVector embed_text(const std::string&) override { return EmbeddingVector::unit({1, 0, 0, 0}); }
  double aesthetic_score(const GeneratedImage&) override { return 5.0; }
};

TEST(BackendSessionTest, DimensionCheck) {
  LyingBackend b;
  BackendSession s(b);
  EXPECT_EQ(s.descriptor().embedding_dim, 4u);
  EXPECT_NO_THROW(s.embed_text("x"));
  EXPECT_THROW(s.embed_image(s.generate("x", 0)), std::exception);
}

TEST(BackendSessionTest, EmptyPromptRejectedBeforeBackend) {
  MockBackend mock(mock_config());
  BackendSession s(mock);
  EXPECT_THROW(s.generate("", 0), BackendError);
  EXPECT_THROW(s.embed_text(""), BackendError);
  EXPECT_EQ(mock.calls().generate, 0u);
}

}  // namespace
}  // namespace memaudit
