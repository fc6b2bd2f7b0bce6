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

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "memaudit/embedded_data.hpp"
#include "memaudit/error.hpp"
#include "memaudit/io.hpp"

namespace memaudit {
namespace {

constexpr double kConstantEpsilon = 1e-12;

std::vector<double> metric_values(const PromptAuditRecord& r, Metric m) {
  std::vector<double> out;
  for (const auto& o : r.outcomes) {
    if (o.failed) continue;
    switch (m) {
      case Metric::kRelevance: out.push_back(o.relevance); break;
      case Metric::kAesthetic: out.push_back(o.aesthetic); break;
      case Metric::kSimilarity: out.push_back(o.max_similarity); break;
    }
  }
  return out;
}

struct RecommendationTable {
  int version = 0;
  std::map<RiskTier, StrategyId> tiers;
};

const RecommendationTable& recommendation_table() {
  static const RecommendationTable table = [] {
    RecommendationTable t;
    const auto doc = nlohmann::json::parse(embedded::kRecommendationsJson);
    t.version = doc.at("version").get<int>();
    for (auto tier : {RiskTier::kHigh, RiskTier::kMedium, RiskTier::kLow}) {
      const auto name = doc.at("tiers").at(std::string(risk_tier_name(tier))).get<std::string>();
      auto id = parse_strategy(name);
      if (!id) throw Error(ErrorCode::kUnknownStrategy, "recommendation table: " + name);
      t.tiers[tier] = *id;
    }
    return t;
  }();
  return table;
}

}  // namespace

Percent2 Percent2::of(std::uint64_t count, std::uint64_t denominator) {
  if (denominator == 0) return {};
  // round_half_up(10000 * count / denominator), in exact integer arithmetic.
  const auto num = static_cast<unsigned __int128>(count) * 20000u + denominator;
  return {static_cast<std::int64_t>(num / (2u * static_cast<unsigned __int128>(denominator)))};
}

std::string Percent2::str() const {
  const auto whole = hundredths / 100;
  const auto frac = hundredths % 100;
  return std::to_string(whole) + "." + (frac < 10 ? "0" : "") + std::to_string(frac);
}

std::vector<StrategySummary> summarize(const std::vector<PromptAuditRecord>& records,
                                       const AuditConfig& cfg) {
  std::map<std::string, std::set<std::string>> captions_by_strategy;
  std::set<std::string> all_captions;
  for (const auto& r : records) {
    captions_by_strategy[r.strategy].insert(r.caption_id);
    all_captions.insert(r.caption_id);
  }
  for (const auto& [strategy, caps] : captions_by_strategy) {
    if (caps != all_captions) {
      throw Error(ErrorCode::kInconsistentCaptionSets,
                  "strategy '" + strategy + "' covers " + std::to_string(caps.size()) + " of " +
                      std::to_string(all_captions.size()) + " captions");
    }
  }

  const std::size_t n_captions = all_captions.size();
  std::vector<StrategySummary> out;
  for (const auto& strategy : cfg.strategies) {
    StrategySummary s;
    s.strategy = strategy;
    s.generation_denominator = n_captions * cfg.seeds_per_run;
    s.prompt_denominator = n_captions;
    for (const auto& r : records) {
      if (r.strategy != strategy) continue;
      double sum = 0.0;
      std::size_t ok = 0;
      for (const auto& o : r.outcomes) {
        if (o.failed) {
          ++s.failed_generations;
          continue;
        }
        if (o.max_similarity >= cfg.tau) ++s.memorized_generations;
        sum += o.max_similarity;
        ++ok;
      }
      if (ok > 0 && quantize6(sum / static_cast<double>(ok)) >= cfg.tau) ++s.high_mean_prompts;
    }
    s.memorized_generation_frequency =
        Percent2::of(s.memorized_generations, s.generation_denominator);
    s.high_mean_prompt_frequency = Percent2::of(s.high_mean_prompts, s.prompt_denominator);
    out.push_back(std::move(s));
  }
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
  }
  if (xs.size() < 2) throw Error(ErrorCode::kLengthMismatch, "need at least two points");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx / n < kConstantEpsilon || syy / n < kConstantEpsilon) {
    throw Error(ErrorCode::kConstantSeries, "series has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<CorrelationReport> correlation_report(const std::vector<PromptAuditRecord>& records,
                                                  const std::vector<std::string>& strategies) {
  std::vector<CorrelationReport> out;
  for (const auto& strategy : strategies) {
    std::vector<double> max_sim;
    std::vector<double> mean_aes;
    std::vector<double> mean_rel;
    for (const auto& r : records) {
      if (r.strategy != strategy) continue;
      const auto sims = metric_values(r, Metric::kSimilarity);
      if (sims.empty()) continue;
      const auto aes = metric_values(r, Metric::kAesthetic);
      const auto rel = metric_values(r, Metric::kRelevance);
      max_sim.push_back(*std::max_element(sims.begin(), sims.end()));
      double sa = 0.0;
      double sr = 0.0;
      for (double a : aes) sa += a;
      for (double v : rel) sr += v;
      mean_aes.push_back(sa / static_cast<double>(aes.size()));
      mean_rel.push_back(sr / static_cast<double>(rel.size()));
    }
    CorrelationReport rep;
    rep.strategy = strategy;
    rep.n = max_sim.size();
    auto fill = [&](const std::vector<double>& ys, std::optional<double>& r, std::string& note) {
      try {
        r = pearson(max_sim, ys);
      } catch (const Error& e) {
        note = std::string(error_code_name(e.code()));
      }
    };
    fill(mean_aes, rep.r_aesthetic, rep.aesthetic_note);
    fill(mean_rel, rep.r_relevance, rep.relevance_note);
    out.push_back(std::move(rep));
  }
  return out;
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kRelevance: return "relevance";
    case Metric::kAesthetic: return "aesthetic";
    case Metric::kSimilarity: return "similarity";
  }
  return "similarity";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (auto m : {Metric::kRelevance, Metric::kAesthetic, Metric::kSimilarity}) {
    if (metric_name(m) == name) return m;
  }
  return std::nullopt;
}

Distribution distribution_data(const std::vector<PromptAuditRecord>& records,
                               const std::vector<std::string>& strategies, Metric metric,
                               std::size_t bins) {
  if (bins < 2) throw Error(ErrorCode::kInvalidConfig, "bins must be >= 2");
  std::map<std::string, std::vector<double>> values;
  for (const auto& s : strategies) values[s];
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& r : records) {
    auto it = values.find(r.strategy);
    if (it == values.end()) continue;
    for (double v : metric_values(r, metric)) {
      it->second.push_back(v);
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
  }
  if (!any) throw Error(ErrorCode::kNoData, "no " + std::string(metric_name(metric)) + " values");
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }

  Distribution d;
  d.metric = metric;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) d.edges.push_back(lo + width * static_cast<double>(i));
  d.edges.back() = hi;
  for (const auto& s : strategies) {
    const auto& vs = values[s];
    Histogram h;
    h.strategy = s;
    h.count = vs.size();
    h.densities.assign(bins, 0.0);
    std::vector<std::size_t> counts(bins, 0);
    std::size_t favorable = 0;
    for (double v : vs) {
      auto b = static_cast<std::size_t>((v - lo) / width);
      if (b >= bins) b = bins - 1;
      ++counts[b];
      if (v > kFavorableAesthetic) ++favorable;
    }
    if (!vs.empty()) {
      for (std::size_t b = 0; b < bins; ++b) {
        h.densities[b] = static_cast<double>(counts[b]) / (static_cast<double>(vs.size()) * width);
      }
    }
    if (metric == Metric::kAesthetic && !vs.empty()) {
      h.favorable_share = static_cast<double>(favorable) / static_cast<double>(vs.size());
    }
    d.histograms.push_back(std::move(h));
  }
  return d;
}

std::string_view risk_tier_name(RiskTier tier) {
  switch (tier) {
    case RiskTier::kHigh: return "high";
    case RiskTier::kMedium: return "medium";
    case RiskTier::kLow: return "low";
  }
  return "high";
}

std::optional<RiskTier> parse_risk_tier(std::string_view name) {
  for (auto t : {RiskTier::kHigh, RiskTier::kMedium, RiskTier::kLow}) {
    if (risk_tier_name(t) == name) return t;
  }
  return std::nullopt;
}

StrategyId recommend_strategy(RiskTier tier) { return recommendation_table().tiers.at(tier); }

int recommendation_table_version() { return recommendation_table().version; }

}  // namespace memaudit
