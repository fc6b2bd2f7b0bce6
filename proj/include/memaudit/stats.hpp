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

// Aggregation of audit records: per-strategy memorization counts, Pearson
// correlations, score histograms and risk-tier recommendations.

#ifndef MEMAUDIT_STATS_HPP_
#define MEMAUDIT_STATS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memaudit/audit.hpp"
#include "memaudit/prompts.hpp"

namespace memaudit {

// A percentage rounded half-up to two decimals, held exactly as hundredths.
struct Percent2 {
  std::int64_t hundredths = 0;

  // 100 * count / denominator; 0 when the denominator is 0.
  static Percent2 of(std::uint64_t count, std::uint64_t denominator);
  double value() const noexcept { return static_cast<double>(hundredths) / 100.0; }
  std::string str() const;  // "41.43"

  friend bool operator==(const Percent2&, const Percent2&) = default;
};

struct StrategySummary {
  std::string strategy;
  std::size_t memorized_generations = 0;
  // Denominator: |captions| * seeds_per_run for this one strategy.
  std::size_t generation_denominator = 0;
  Percent2 memorized_generation_frequency;
  std::size_t high_mean_prompts = 0;
  std::size_t prompt_denominator = 0;
  Percent2 high_mean_prompt_frequency;
  std::size_t failed_generations = 0;
};

// One summary per cfg.strategies entry. Counts are recomputed from stored
// similarities at cfg.tau. Throws InconsistentCaptionSets.
std::vector<StrategySummary> summarize(const std::vector<PromptAuditRecord>& records,
                                       const AuditConfig& cfg);

// Sample Pearson correlation. Throws LengthMismatch (also for n < 2) and
// ConstantSeries.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct CorrelationReport {
  std::string strategy;
  std::optional<double> r_aesthetic;
  std::optional<double> r_relevance;
  std::string aesthetic_note;  // reason when r_aesthetic is empty
  std::string relevance_note;
  std::size_t n = 0;
};

// Per strategy: x is each prompt's maximum similarity across seeds, y its
// mean aesthetic (resp. mean relevance) over non-failed outcomes.
std::vector<CorrelationReport> correlation_report(const std::vector<PromptAuditRecord>& records,
                                                  const std::vector<std::string>& strategies);

enum class Metric { kRelevance, kAesthetic, kSimilarity };
std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

inline constexpr double kFavorableAesthetic = 5.0;

struct Histogram {
  std::string strategy;
  std::vector<double> densities;  // one per bin
  std::size_t count = 0;
  // Share of values strictly above kFavorableAesthetic (aesthetic only).
  std::optional<double> favorable_share;
};

struct Distribution {
  Metric metric = Metric::kSimilarity;
  std::vector<double> edges;  // bins + 1, shared by all strategies
  std::vector<Histogram> histograms;
};

// Equal-width bins over the pooled min/max of all strategies. Throws NoData
// or InvalidConfig for bins < 2.
Distribution distribution_data(const std::vector<PromptAuditRecord>& records,
                               const std::vector<std::string>& strategies, Metric metric,
                               std::size_t bins);

enum class RiskTier { kHigh, kMedium, kLow };
std::string_view risk_tier_name(RiskTier tier);
std::optional<RiskTier> parse_risk_tier(std::string_view name);

// Lookup in the versioned table shipped as data/recommendations.json.
StrategyId recommend_strategy(RiskTier tier);
int recommendation_table_version();

}  // namespace memaudit

#endif  // MEMAUDIT_STATS_HPP_
