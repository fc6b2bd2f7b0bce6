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

#include "memaudit/mock_backend.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "memaudit/error.hpp"
#include "memaudit/io.hpp"
#include "memaudit/rng.hpp"

namespace memaudit {
namespace {

using nlohmann::json;

constexpr std::string_view kImageHeader = "memaudit-mock-image v1\n";

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  SplitMix64 r(a ^ (b * 0x9E3779B97F4A7C15ULL));
  r.next();
  return r.next();
}

std::string hex16(std::uint64_t v) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kHex[v & 0xf];
  return s;
}

GeneratedImage make_image(std::string bytes, const std::string& prompt, std::uint64_t seed) {
  GeneratedImage img;
  img.image_id = sha256_hex(bytes);
  img.bytes = std::move(bytes);
  img.prompt_used = prompt;
  img.seed = seed;
  return img;
}

}  // namespace

std::map<std::string, double> default_strategy_multipliers() {
  return {{"baseline", 1.0},
          {"task_instruction", 0.204 / 0.414},
          {"negation", 0.348 / 0.414},
          {"chain_of_thought", 0.096 / 0.414}};
}

std::size_t memorized_seed_count(double effective_rate, std::size_t reference_seeds) {
  const double x = std::clamp(effective_rate, 0.0, 1.0) * static_cast<double>(reference_seeds);
  // Products like 0.2 * 75 land a few ulps above the integer.
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

void MockModelConfig::validate() const {
  if (!corpus) throw Error(ErrorCode::kInvalidConfig, "mock needs a corpus");
  if (!(memorization_rate >= 0.0 && memorization_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "memorization_rate must be in [0,1]");
  }
  for (const auto& [name, m] : strategy_multipliers) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw Error(ErrorCode::kInvalidConfig, "multiplier for '" + name + "' must be >= 0");
    }
  }
  for (const auto& id : memorized_caption_ids) {
    if (!corpus->find(id)) {
      throw Error(ErrorCode::kInvalidConfig, "memorized id '" + id + "' not in corpus");
    }
  }
  if (reference_seeds == 0) throw Error(ErrorCode::kInvalidConfig, "reference_seeds is 0");
  if (!(noise_aesthetic_min <= noise_aesthetic_max)) {
    throw Error(ErrorCode::kInvalidConfig, "noise aesthetic band is inverted");
  }
  if (!(text_coupling > 0.0 && text_coupling <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "text_coupling must be in (0,1]");
  }
}

MockModelConfig parse_mock_config(std::string_view json_text,
                                  const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("mock config: ") + e.what());
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  MockModelConfig cfg;
  try {
    cfg.corpus = std::make_shared<const CorpusIndex>(
        load_corpus(resolve(doc.at("corpus_manifest").get<std::string>()),
                    resolve(doc.at("corpus_store").get<std::string>())));
    if (doc.contains("memorized_caption_ids")) {
      const auto& ids = doc["memorized_caption_ids"];
      if (ids.is_string() && ids.get<std::string>() == "all") {
        for (const auto& r : cfg.corpus->records()) cfg.memorized_caption_ids.insert(r.record_id);
      } else {
        for (const auto& id : ids) cfg.memorized_caption_ids.insert(id.get<std::string>());
      }
    }
    cfg.memorization_rate = doc.value("memorization_rate", cfg.memorization_rate);
    if (doc.contains("strategy_multipliers")) {
      for (const auto& [k, v] : doc["strategy_multipliers"].items()) {
        cfg.strategy_multipliers[k] = v.get<double>();
      }
    }
    cfg.noise_seed = doc.value("noise_seed", cfg.noise_seed);
    cfg.reference_seeds = doc.value("reference_seeds", cfg.reference_seeds);
    cfg.memorized_aesthetic = doc.value("memorized_aesthetic", cfg.memorized_aesthetic);
    if (doc.contains("noise_aesthetic_band")) {
      cfg.noise_aesthetic_min = doc["noise_aesthetic_band"].at(0).get<double>();
      cfg.noise_aesthetic_max = doc["noise_aesthetic_band"].at(1).get<double>();
    }
    cfg.text_coupling = doc.value("text_coupling", cfg.text_coupling);
    if (doc.contains("rejected_seeds")) {
      for (const auto& s : doc["rejected_seeds"]) cfg.rejected_seeds.insert(s.get<std::uint64_t>());
    }
    cfg.model_label = doc.value("model_label", cfg.model_label);
    if (doc.contains("templates")) {
      cfg.templates = std::make_shared<const TemplateLibrary>(
          TemplateLibrary::with_user_file(resolve(doc["templates"].get<std::string>())));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("mock config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

MockModelConfig load_mock_config(const std::filesystem::path& path) {
  return parse_mock_config(read_file(path), path.parent_path());
}

MockBackend::MockBackend(MockModelConfig config) : config_(std::move(config)) {
  config_.validate();
  if (!config_.templates) {
    config_.templates = std::shared_ptr<const TemplateLibrary>(&TemplateLibrary::builtin(),
                                                               [](const TemplateLibrary*) {});
  }
  for (const auto& name : config_.templates->names()) {
    match_order_.push_back(&config_.templates->get(name));
  }
  // Most specific template first so "Generate an image of" never shadows a
  // longer template sharing its prefix.
  std::stable_sort(match_order_.begin(), match_order_.end(), [](auto* a, auto* b) {
    return a->prefix().size() + a->suffix().size() > b->prefix().size() + b->suffix().size();
  });
  for (const auto& r : config_.corpus->records()) {
    const std::string key(trim_caption(r.caption));
    auto [it, inserted] = caption_to_record_.emplace(key, r.record_id);
    if (!inserted && !config_.memorized_caption_ids.contains(it->second) &&
        config_.memorized_caption_ids.contains(r.record_id)) {
      it->second = r.record_id;
    }
  }
}

BackendDescriptor MockBackend::handshake() {
  ++n_handshake_;
  return {"mock", "", config_.corpus->embeddings().dim(), config_.model_label, true};
}

std::pair<std::string, std::string> MockBackend::parse_prompt(std::string_view prompt) const {
  for (const auto* t : match_order_) {
    if (auto caption = t->match(prompt)) return {t->name(), *caption};
  }
  return {"", std::string(trim_caption(prompt))};
}

GeneratedImage MockBackend::generate(const std::string& prompt, std::uint64_t seed) {
  ++n_generate_;
  if (prompt.empty()) throw BackendError(BackendErrorKind::kEmptyInput, "empty prompt");
  if (config_.rejected_seeds.contains(seed)) {
    throw BackendError(BackendErrorKind::kRejected, "seed " + std::to_string(seed) + " rejected");
  }
  const auto [strategy, caption] = parse_prompt(prompt);
  auto it = caption_to_record_.find(caption);
  if (it != caption_to_record_.end() && config_.memorized_caption_ids.contains(it->second)) {
    auto mult = config_.strategy_multipliers.find(strategy);
    const double factor = mult == config_.strategy_multipliers.end() ? 1.0 : mult->second;
    const std::size_t hits =
        memorized_seed_count(config_.memorization_rate * factor, config_.reference_seeds);
    if (seed % config_.reference_seeds < hits) {
      return make_image(std::string(kImageHeader) + "kind=memorized\nrecord=" + it->second + "\n",
                        prompt, seed);
    }
  }
  const std::uint64_t key = mix(mix(fnv1a64(prompt), seed), config_.noise_seed);
  return make_image(std::string(kImageHeader) + "kind=noise\nkey=" + hex16(key) + "\n", prompt,
                    seed);
}

MockBackend::Decoded MockBackend::decode(const GeneratedImage& image) const {
  std::string_view b = image.bytes;
  if (!b.starts_with(kImageHeader)) {
    throw BackendError(BackendErrorKind::kDecode, "not a mock image");
  }
  b.remove_prefix(kImageHeader.size());
  Decoded d;
  if (b.starts_with("kind=memorized\nrecord=") && b.ends_with("\n")) {
    d.memorized = true;
    d.record_id = std::string(b.substr(22, b.size() - 23));
    if (!config_.corpus->find(d.record_id)) {
      throw BackendError(BackendErrorKind::kDecode, "unknown record in image");
    }
    return d;
  }
  if (b.starts_with("kind=noise\nkey=") && b.size() == 15 + 16 + 1 && b.back() == '\n') {
    const std::string hex(b.substr(15, 16));
    if (hex.find_first_not_of("0123456789abcdef") != std::string::npos) {
      throw BackendError(BackendErrorKind::kDecode, "bad noise key");
    }
    d.key = std::stoull(hex, nullptr, 16);
    return d;
  }
  throw BackendError(BackendErrorKind::kDecode, "malformed mock image");
}

EmbeddingVector MockBackend::noise_vector(std::uint64_t key) const {
  SplitMix64 rng(key);
  std::vector<double> v(config_.corpus->embeddings().dim());
  // Box-Muller gives an isotropic direction.
  for (std::size_t i = 0; i < v.size(); i += 2) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * M_PI * u2);
    if (i + 1 < v.size()) v[i + 1] = r * std::sin(2.0 * M_PI * u2);
  }
  return normalize(EmbeddingVector(std::move(v)));
}

EmbeddingVector MockBackend::embed_image(const GeneratedImage& image) {
  ++n_embed_image_;
  const auto d = decode(image);
  if (d.memorized) return config_.corpus->embedding_of(config_.corpus->at(d.record_id));
  return noise_vector(d.key);
}

EmbeddingVector MockBackend::embed_text(const std::string& text) {
  ++n_embed_text_;
  if (text.empty()) throw BackendError(BackendErrorKind::kEmptyInput, "empty text");
  const std::uint64_t key = mix(fnv1a64(text) ^ 0x7465787400000000ULL, config_.noise_seed);
  const auto noise = noise_vector(key);
  const auto caption = parse_prompt(text).second;
  auto it = caption_to_record_.find(caption);
  if (it == caption_to_record_.end()) return noise;

  // c * e + sqrt(1 - c^2) * n', with n' the noise made orthogonal to e.
  const auto e = config_.corpus->embedding_of(config_.corpus->at(it->second));
  double proj = 0.0;
  for (std::size_t i = 0; i < e.dim(); ++i) proj += noise[i] * e[i];
  std::vector<double> perp(e.dim());
  for (std::size_t i = 0; i < e.dim(); ++i) perp[i] = noise[i] - proj * e[i];
  const double c = config_.text_coupling;
  std::vector<double> out(e.dim());
  double pn = 0.0;
  for (double x : perp) pn += x * x;
  pn = std::sqrt(pn);
  for (std::size_t i = 0; i < e.dim(); ++i) {
    out[i] = c * e[i] + (pn > kZeroNormEpsilon ? std::sqrt(1.0 - c * c) * perp[i] / pn : 0.0);
  }
  return normalize(EmbeddingVector(std::move(out)));
}

double MockBackend::aesthetic_score(const GeneratedImage& image) {
  ++n_aesthetic_;
  const auto d = decode(image);
  if (d.memorized) return config_.memorized_aesthetic;
  SplitMix64 rng(d.key ^ 0xae57e71c00000000ULL);
  return config_.noise_aesthetic_min +
         (config_.noise_aesthetic_max - config_.noise_aesthetic_min) * rng.uniform();
}

MockBackend::CallCounts MockBackend::calls() const {
  return {n_handshake_.load(), n_generate_.load(), n_embed_image_.load(), n_embed_text_.load(),
          n_aesthetic_.load()};
}

}  // namespace memaudit
