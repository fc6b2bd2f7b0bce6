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

#include "memaudit/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>

#include "memaudit/error.hpp"
#include "memaudit/io.hpp"

namespace memaudit {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string r2(const std::optional<double>& r) {
  return r ? format_fixed(*r, 2) : std::string("n/a");
}

// ordered_json would print doubles at full precision; fixed-width numbers
// are spliced in as raw text instead.
std::string number_or_null(const std::optional<double>& v, int decimals) {
  return v ? format_fixed(*v, decimals) : std::string("null");
}

}  // namespace

std::string summary_csv(const std::vector<StrategySummary>& summaries) {
  std::string out =
      "strategy,memorized_generations,gen_frequency_pct,high_mean_prompts,prompt_frequency_pct\n";
  for (const auto& s : summaries) {
    out += s.strategy + "," + std::to_string(s.memorized_generations) + "," +
           s.memorized_generation_frequency.str() + "," + std::to_string(s.high_mean_prompts) +
           "," + s.high_mean_prompt_frequency.str() + "\n";
  }
  return out;
}

std::string correlations_json(const std::vector<CorrelationReport>& reports) {
  std::string out = "{\n  \"x\": \"per-prompt maximum similarity across seeds\",\n";
  out += "  \"y_aggregation\": \"per-prompt mean over non-failed seeds\",\n";
  out += "  \"correlations\": [";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"strategy\": " + json(r.strategy).dump();
    out += ", \"n\": " + std::to_string(r.n);
    out += ", \"r_aesthetic\": " + number_or_null(r.r_aesthetic, 2);
    out += ", \"r_relevance\": " + number_or_null(r.r_relevance, 2);
    out += ", \"r_aesthetic_full\": " + number_or_null(r.r_aesthetic, 6);
    out += ", \"r_relevance_full\": " + number_or_null(r.r_relevance, 6);
    if (!r.r_aesthetic) out += ", \"aesthetic_null_reason\": " + json(r.aesthetic_note).dump();
    if (!r.r_relevance) out += ", \"relevance_null_reason\": " + json(r.relevance_note).dump();
    out += "}";
  }
  out += "\n  ]\n}\n";
  return out;
}

std::string distributions_json(const std::vector<Distribution>& distributions) {
  std::string out = "{\n  \"distributions\": [";
  for (std::size_t i = 0; i < distributions.size(); ++i) {
    const auto& d = distributions[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"metric\": \"" + std::string(metric_name(d.metric)) + "\",\n     \"edges\": [";
    for (std::size_t e = 0; e < d.edges.size(); ++e) {
      out += (e ? ", " : "") + format_fixed(d.edges[e]);
    }
    out += "],\n     \"strategies\": [";
    for (std::size_t h = 0; h < d.histograms.size(); ++h) {
      const auto& hist = d.histograms[h];
      out += h == 0 ? "\n" : ",\n";
      out += "       {\"strategy\": " + json(hist.strategy).dump() +
             ", \"count\": " + std::to_string(hist.count);
      if (hist.favorable_share) {
        out += ", \"favorable_threshold\": " + format_fixed(kFavorableAesthetic, 1);
        out += ", \"favorable_share\": " + format_fixed(*hist.favorable_share);
      }
      out += ", \"densities\": [";
      for (std::size_t b = 0; b < hist.densities.size(); ++b) {
        out += (b ? ", " : "") + format_fixed(hist.densities[b]);
      }
      out += "]}";
    }
    out += "\n     ]}";
  }
  out += "\n  ]\n}\n";
  return out;
}

std::string histogram_svg(const Distribution& d) {
  constexpr int kWidth = 640;
  constexpr int kHeight = 360;
  constexpr int kMargin = 40;
  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  double peak = 0.0;
  for (const auto& h : d.histograms) {
    for (double v : h.densities) peak = std::max(peak, v);
  }
  if (peak <= 0.0) peak = 1.0;
  const double lo = d.edges.front();
  const double hi = d.edges.back();
  auto px = [&](double x) { return kMargin + (x - lo) / (hi - lo) * (kWidth - 2 * kMargin); };
  auto py = [&](double y) { return kHeight - kMargin - y / peak * (kHeight - 2 * kMargin); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
                  "\" height=\"" + std::to_string(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\">" +
       std::string(metric_name(d.metric)) + " score distribution</text>\n";
  s += "<line x1=\"" + std::to_string(kMargin) + "\" y1=\"" + std::to_string(kHeight - kMargin) +
       "\" x2=\"" + std::to_string(kWidth - kMargin) + "\" y2=\"" +
       std::to_string(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(kHeight - 20) + "\">" +
       format_fixed(lo, 3) + "</text>\n";
  s += "<text x=\"" + std::to_string(kWidth - kMargin) + "\" y=\"" +
       std::to_string(kHeight - 20) + "\" text-anchor=\"end\">" + format_fixed(hi, 3) +
       "</text>\n";
  for (std::size_t h = 0; h < d.histograms.size(); ++h) {
    const auto& hist = d.histograms[h];
    const char* color = kColors[h % std::size(kColors)];
    std::string points;
    for (std::size_t b = 0; b < hist.densities.size(); ++b) {
      const double y = py(hist.densities[b]);
      points += format_fixed(px(d.edges[b]), 2) + "," + format_fixed(y, 2) + " ";
      points += format_fixed(px(d.edges[b + 1]), 2) + "," + format_fixed(y, 2) + " ";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"" + points +
         "\"/>\n";
    s += "<text x=\"" + std::to_string(kWidth - kMargin) + "\" y=\"" +
         std::to_string(40 + 16 * h) + "\" text-anchor=\"end\" fill=\"" + color + "\">" +
         hist.strategy + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string report_markdown(const ReportContext& ctx,
                            const std::vector<StrategySummary>& summaries,
                            const std::vector<CorrelationReport>& correlations,
                            const std::vector<Distribution>& distributions) {
  const auto& cfg = ctx.config;
  std::string s = "# Memorization audit report\n\n";
  s += "- backend: " + ctx.backend_label + "\n";
  s += "- config digest: `" + ctx.config_digest + "`\n";
  s += "- corpus digest: `" + ctx.corpus_digest + "`\n";
  s += "- tau: " + format_fixed(cfg.tau, 4) + "\n";
  s += "- seeds per prompt: " + std::to_string(cfg.seeds_per_run) + "\n";
  s += "- captions: " +
       std::to_string(summaries.empty() ? 0 : summaries.front().prompt_denominator) + "\n\n";

  s += "## Generations and prompts similar to training data\n\n";
  s += "| Strategy | Count Gen. (Prmpt.) | Frequency % Gen. (Prmpt.) | Failed |\n";
  s += "|---|---|---|---|\n";
  for (const auto& x : summaries) {
    s += "| " + x.strategy + " | " + std::to_string(x.memorized_generations) + " (" +
         std::to_string(x.high_mean_prompts) + ") | " + x.memorized_generation_frequency.str() +
         " (" + x.high_mean_prompt_frequency.str() + ") | " +
         std::to_string(x.failed_generations) + " |\n";
  }
  s += "\nGeneration frequencies are per strategy, over captions x seeds. Prompt "
       "frequencies count captions whose mean similarity across seeds is at least tau. "
       "Failed cells are excluded from counts and listed separately.\n\n";

  s += "## Correlation of maximum similarity with quality\n\n";
  s += "| Strategy | n | r (aesthetic) | r (relevance) |\n|---|---|---|---|\n";
  for (const auto& c : correlations) {
    s += "| " + c.strategy + " | " + std::to_string(c.n) + " | " + r2(c.r_aesthetic) + " | " +
         r2(c.r_relevance) + " |\n";
  }
  s += "\nx is each prompt's maximum similarity across seeds; y is the prompt's mean "
       "aesthetic or relevance score.\n\n";

  for (const auto& d : distributions) {
    if (d.metric != Metric::kAesthetic) continue;
    s += "## Aesthetic scores above " + format_fixed(kFavorableAesthetic, 1) + "\n\n";
    s += "| Strategy | share |\n|---|---|\n";
    for (const auto& h : d.histograms) {
      s += "| " + h.strategy + " | " +
           (h.favorable_share ? format_fixed(100.0 * *h.favorable_share, 2) + "%" : "n/a") +
           " |\n";
    }
    s += "\n";
  }

  s += "## Recommendations\n\n| Risk tier | Strategy |\n|---|---|\n";
  for (auto tier : {RiskTier::kHigh, RiskTier::kMedium, RiskTier::kLow}) {
    s += "| " + std::string(risk_tier_name(tier)) + " | " +
         std::string(strategy_name(recommend_strategy(tier))) + " |\n";
  }
  s += "\nRecommendation table version " + std::to_string(recommendation_table_version()) + ".\n";
  return s;
}

void write_report(const std::filesystem::path& out_dir,
                  const std::vector<PromptAuditRecord>& records, const ReportContext& ctx) {
  const auto summaries = summarize(records, ctx.config);
  const auto correlations = correlation_report(records, ctx.config.strategies);
  std::vector<Distribution> distributions;
  for (auto m : {Metric::kRelevance, Metric::kAesthetic, Metric::kSimilarity}) {
    try {
      distributions.push_back(distribution_data(records, ctx.config.strategies, m, ctx.bins));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoData) throw;
    }
  }
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "summary.csv", summary_csv(summaries));
  write_file(out_dir / "correlations.json", correlations_json(correlations));
  write_file(out_dir / "distributions.json", distributions_json(distributions));
  write_file(out_dir / "report.md",
             report_markdown(ctx, summaries, correlations, distributions));
  if (ctx.svg) {
    for (const auto& d : distributions) {
      write_file(out_dir / (std::string(metric_name(d.metric)) + "_by_strategy.svg"),
                 histogram_svg(d));
    }
  }
}

}  // namespace memaudit
