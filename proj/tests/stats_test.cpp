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

#include "memaudit/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "memaudit/error.hpp"
#include "table_fixture.hpp"

namespace memaudit {
namespace {

// Textbook single-pass formula, independent of the library.
double textbook_r(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

TEST(Percent2Test, HalfUpRounding) {
  EXPECT_EQ(Percent2::of(2082, 5025).str(), "41.43");
  EXPECT_EQ(Percent2::of(1026, 5025).str(), "20.42");
  EXPECT_EQ(Percent2::of(1751, 5025).str(), "34.85");
  EXPECT_EQ(Percent2::of(484, 5025).str(), "9.63");
  EXPECT_EQ(Percent2::of(21, 67).str(), "31.34");
  EXPECT_EQ(Percent2::of(1, 67).str(), "1.49");
  EXPECT_EQ(Percent2::of(1, 8).str(), "12.50");
  EXPECT_EQ(Percent2::of(1, 80000).str(), "0.00");
  EXPECT_EQ(Percent2::of(1, 20000).str(), "0.01");  // exactly .005 rounds up
  EXPECT_EQ(Percent2::of(0, 0).str(), "0.00");
  EXPECT_EQ(Percent2::of(3, 3).str(), "100.00");
}

TEST(SummarizeTest, ReproducesTable) {
  AuditConfig cfg;
  const auto sums = summarize(testing::table_records(), cfg);
  ASSERT_EQ(sums.size(), 4u);
  const std::vector<std::pair<std::string, std::string>> want = {
      {"41.43", "31.34"}, {"20.42", "10.45"}, {"34.85", "23.88"}, {"9.63", "1.49"}};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& t = testing::table_targets()[i];
    EXPECT_EQ(sums[i].strategy, t.strategy);
    EXPECT_EQ(sums[i].memorized_generations, t.memorized);
    EXPECT_EQ(sums[i].generation_denominator, 5025u);
    EXPECT_EQ(sums[i].high_mean_prompts, t.high_prompts);
    EXPECT_EQ(sums[i].prompt_denominator, 67u);
    EXPECT_EQ(sums[i].memorized_generation_frequency.str(), want[i].first);
    EXPECT_EQ(sums[i].high_mean_prompt_frequency.str(), want[i].second);
  }
}

TEST(SummarizeTest, InconsistentCaptionSets) {
  auto recs = testing::table_records();
  recs.pop_back();
  try {
    summarize(recs, AuditConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentCaptionSets);
  }
}

TEST(SummarizeTest, EmptyInput) {
  const auto sums = summarize({}, AuditConfig{});
  for (const auto& s : sums) EXPECT_EQ(s.memorized_generations, 0u);
}

TEST(PearsonTest, Examples) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  EXPECT_NEAR(pearson(x, std::vector<double>{2, 1, 4, 3, 5}), 0.8, 1e-15);
  EXPECT_EQ(pearson(x, std::vector<double>{2, 4, 6, 8, 10}), 1.0);
  EXPECT_EQ(pearson(x, std::vector<double>{5, 4, 3, 2, 1}), -1.0);
  try {
    pearson(x, std::vector<double>{3, 3, 3, 3, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConstantSeries);
  }
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(pearson(std::vector<double>{1}, std::vector<double>{1}), Error);
}

TEST(PearsonTest, Properties) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 1);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> x(3 + t % 50), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      y[i] = 0.3 * x[i] + n(rng);
    }
    const double r = pearson(x, y);
    EXPECT_LE(std::abs(r), 1.0);
    EXPECT_NEAR(r, pearson(y, x), 1e-15);
    EXPECT_NEAR(r, textbook_r(x, y), 1e-9);
    std::vector<double> ax(x.size()), neg(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      ax[i] = 3.5 * x[i] - 7;
      neg[i] = -y[i];
    }
    EXPECT_NEAR(pearson(ax, y), r, 1e-12);
    EXPECT_NEAR(pearson(x, neg), -r, 1e-12);
    EXPECT_NEAR(pearson(x, ax), 1.0, 1e-12);
  }
}

PromptAuditRecord rec(const std::string& cap, const std::string& strat,
                      std::vector<std::tuple<double, double, double>> sims_aes_rel) {
  PromptAuditRecord r;
  r.caption_id = cap;
  r.strategy = strat;
  std::uint64_t seed = 0;
  for (auto [s, a, l] : sims_aes_rel) {
    GenerationOutcome o;
    o.caption_id = cap;
    o.strategy = strat;
    o.seed = seed++;
    o.max_similarity = s;
    o.aesthetic = a;
    o.relevance = l;
    r.outcomes.push_back(o);
  }
  return r;
}

TEST(CorrelationReportTest, AffineRelationGivesOne) {
  std::vector<PromptAuditRecord> recs;
  for (int i = 0; i < 5; ++i) {
    const double s = 0.5 + 0.1 * i;
    recs.push_back(rec("c" + std::to_string(i), "baseline",
                       {{s, 4 + 2 * s, 0.2}, {s - 0.1, 4 + 2 * s, 0.1 * i}}));
  }
  const auto reps = correlation_report(recs, {"baseline"});
  ASSERT_EQ(reps.size(), 1u);
  ASSERT_TRUE(reps[0].r_aesthetic);
  EXPECT_NEAR(*reps[0].r_aesthetic, 1.0, 1e-12);
  ASSERT_TRUE(reps[0].r_relevance);
  EXPECT_NEAR(*reps[0].r_relevance, 1.0, 1e-9);
  EXPECT_EQ(reps[0].n, 5u);
}

TEST(CorrelationReportTest, ConstantSeriesGivesNullWithReason) {
  std::vector<PromptAuditRecord> recs;
  for (int i = 0; i < 4; ++i) {
    recs.push_back(rec("c" + std::to_string(i), "negation", {{0.1 * i, 5.0, 0.1 * i}}));
  }
  const auto reps = correlation_report(recs, {"negation"});
  EXPECT_FALSE(reps[0].r_aesthetic);
  EXPECT_EQ(reps[0].aesthetic_note, "ConstantSeries");
  EXPECT_TRUE(reps[0].r_relevance);
}

TEST(DistributionTest, SharedEdgesAndDensities) {
  std::vector<PromptAuditRecord> recs = {rec("a", "baseline", {{0, 4, 0}, {1, 6, 0}}),
                                         rec("a", "negation", {{0.5, 5, 0}, {0.5, 5.5, 0}})};
  const auto d = distribution_data(recs, {"baseline", "negation"}, Metric::kAesthetic, 4);
  ASSERT_EQ(d.edges.size(), 5u);
  EXPECT_EQ(d.edges.front(), 4.0);
  EXPECT_EQ(d.edges.back(), 6.0);
  ASSERT_EQ(d.histograms.size(), 2u);
  for (const auto& h : d.histograms) {
    double area = 0;
    for (double x : h.densities) area += x * 0.5;
    EXPECT_NEAR(area, 1.0, 1e-12);
  }
  EXPECT_EQ(*d.histograms[0].favorable_share, 0.5);
  EXPECT_EQ(*d.histograms[1].favorable_share, 0.5);
  const auto s = distribution_data(recs, {"baseline"}, Metric::kSimilarity, 4);
  EXPECT_FALSE(s.histograms[0].favorable_share);
  EXPECT_THROW(distribution_data(recs, {"baseline"}, Metric::kSimilarity, 1), Error);
}

TEST(DistributionTest, DegenerateRangeWidens) {
  std::vector<PromptAuditRecord> recs = {rec("a", "baseline", {{0.7, 5, 0.7}, {0.7, 5, 0.7}})};
  const auto d = distribution_data(recs, {"baseline"}, Metric::kRelevance, 2);
  EXPECT_NEAR(d.edges.front(), 0.2, 1e-12);
  EXPECT_NEAR(d.edges.back(), 1.2, 1e-12);
}

TEST(RecommendTest, Table) {
  EXPECT_EQ(recommend_strategy(RiskTier::kHigh), StrategyId::kChainOfThought);
  EXPECT_EQ(recommend_strategy(RiskTier::kMedium), StrategyId::kTaskInstruction);
  EXPECT_EQ(recommend_strategy(RiskTier::kLow), StrategyId::kNegation);
  EXPECT_EQ(recommendation_table_version(), 1);
  EXPECT_EQ(parse_risk_tier("medium"), RiskTier::kMedium);
  EXPECT_FALSE(parse_risk_tier("extreme"));
  EXPECT_EQ(parse_metric("aesthetic"), Metric::kAesthetic);
}

}  // namespace
}  // namespace memaudit
