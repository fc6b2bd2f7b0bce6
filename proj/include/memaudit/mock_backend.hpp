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

// Deterministic in-process backend with a controllable memorization dial.
//
// A prompt is mapped back to (strategy, caption) through the template
// library. For a memorized caption the effective rate is
//   memorization_rate * strategy_multipliers[strategy]
// and seed s reproduces the caption's training image exactly when
//   (s mod reference_seeds) < ceil(rate * reference_seeds).
// Every other generation is a noise image whose embedding is a pseudo-random
// unit vector keyed by (prompt, seed, noise_seed).

#ifndef MEMAUDIT_MOCK_BACKEND_HPP_
#define MEMAUDIT_MOCK_BACKEND_HPP_

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>

#include "memaudit/backend.hpp"
#include "memaudit/corpus.hpp"
#include "memaudit/prompts.hpp"

namespace memaudit {

// Defaults reproduce the per-strategy generation frequencies of the
// reference audit (41.4 / 20.4 / 34.8 / 9.6 percent).
std::map<std::string, double> default_strategy_multipliers();

struct MockModelConfig {
  std::shared_ptr<const CorpusIndex> corpus;
  std::set<std::string> memorized_caption_ids;
  double memorization_rate = 0.414;
  std::map<std::string, double> strategy_multipliers = default_strategy_multipliers();
  std::uint64_t noise_seed = 0;
  std::size_t reference_seeds = 75;
  double memorized_aesthetic = 6.25;
  double noise_aesthetic_min = 4.5;
  double noise_aesthetic_max = 6.5;
  // Cosine between a caption's text embedding and its paired image.
  double text_coupling = 0.95;
  // Seeds for which generate() fails with GenerationRejected.
  std::set<std::uint64_t> rejected_seeds;
  std::string model_label = "memaudit-mock";
  std::shared_ptr<const TemplateLibrary> templates;

  // Throws InvalidConfig.
  void validate() const;
};

// Reads the JSON form used by `--backend mock:<path>`. Relative corpus paths
// resolve against the config file's directory.
MockModelConfig load_mock_config(const std::filesystem::path& path);
MockModelConfig parse_mock_config(std::string_view json_text,
                                  const std::filesystem::path& base_dir);

// Number of seeds in [0, reference_seeds) that reproduce a memorized image.
std::size_t memorized_seed_count(double effective_rate, std::size_t reference_seeds);

class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockModelConfig config);

  BackendDescriptor handshake() override;
  GeneratedImage generate(const std::string& prompt, std::uint64_t seed) override;
  EmbeddingVector embed_image(const GeneratedImage& image) override;
  EmbeddingVector embed_text(const std::string& text) override;
  double aesthetic_score(const GeneratedImage& image) override;

  const MockModelConfig& config() const noexcept { return config_; }

  struct CallCounts {
    std::size_t handshake = 0;
    std::size_t generate = 0;
    std::size_t embed_image = 0;
    std::size_t embed_text = 0;
    std::size_t aesthetic = 0;
  };
  CallCounts calls() const;

 private:
  struct Decoded {
    bool memorized = false;
    std::string record_id;
    std::uint64_t key = 0;
  };
  Decoded decode(const GeneratedImage& image) const;
  // (strategy name, trimmed caption) recovered from a rendered prompt.
  std::pair<std::string, std::string> parse_prompt(std::string_view prompt) const;
  EmbeddingVector noise_vector(std::uint64_t key) const;

  MockModelConfig config_;
  std::vector<const PromptTemplate*> match_order_;
  std::unordered_map<std::string, std::string> caption_to_record_;
  std::atomic<std::size_t> n_handshake_{0};
  std::atomic<std::size_t> n_generate_{0};
  std::atomic<std::size_t> n_embed_image_{0};
  std::atomic<std::size_t> n_embed_text_{0};
  std::atomic<std::size_t> n_aesthetic_{0};
};

}  // namespace memaudit

#endif  // MEMAUDIT_MOCK_BACKEND_HPP_
