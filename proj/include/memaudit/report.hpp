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

// Report emission: summary.csv, correlations.json, distributions.json,
// report.md and optional SVG histograms.

#ifndef MEMAUDIT_REPORT_HPP_
#define MEMAUDIT_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "memaudit/stats.hpp"

namespace memaudit {

struct ReportContext {
  AuditConfig config;
  std::string config_digest;
  std::string corpus_digest;
  std::string backend_label;
  std::size_t bins = 40;
  bool svg = false;
};

std::string summary_csv(const std::vector<StrategySummary>& summaries);
std::string correlations_json(const std::vector<CorrelationReport>& reports);
std::string distributions_json(const std::vector<Distribution>& distributions);
std::string histogram_svg(const Distribution& distribution);
std::string report_markdown(const ReportContext& ctx,
                            const std::vector<StrategySummary>& summaries,
                            const std::vector<CorrelationReport>& correlations,
                            const std::vector<Distribution>& distributions);

// Writes every report file into `out_dir`. Output depends only on the inputs.
void write_report(const std::filesystem::path& out_dir,
                  const std::vector<PromptAuditRecord>& records, const ReportContext& ctx);

}  // namespace memaudit

#endif  // MEMAUDIT_REPORT_HPP_
