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

#include "memaudit/prompts.hpp"

#include <json.hpp>

#include "memaudit/embedded_data.hpp"
#include "memaudit/error.hpp"
#include "memaudit/io.hpp"

namespace memaudit {
namespace {

using nlohmann::json;

std::vector<PromptTemplate> parse_template_file(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidTemplate, e.what());
  }
  const json* map = &doc;
  if (doc.is_object() && doc.contains("templates")) map = &doc["templates"];
  if (!map->is_object()) throw Error(ErrorCode::kInvalidTemplate, "expected a JSON object");
  std::vector<PromptTemplate> out;
  for (const auto& [name, value] : map->items()) {
    if (!value.is_string()) {
      throw Error(ErrorCode::kInvalidTemplate, "template '" + name + "' is not a string");
    }
    out.emplace_back(name, value.get<std::string>());
  }
  return out;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string_view strategy_name(StrategyId id) {
  switch (id) {
    case StrategyId::kBaseline: return "baseline";
    case StrategyId::kTaskInstruction: return "task_instruction";
    case StrategyId::kNegation: return "negation";
    case StrategyId::kChainOfThought: return "chain_of_thought";
  }
  return "baseline";
}

std::optional<StrategyId> parse_strategy(std::string_view name) {
  for (auto id : kAllStrategies) {
    if (strategy_name(id) == name) return id;
  }
  return std::nullopt;
}

std::string_view trim_caption(std::string_view caption) {
  while (!caption.empty() && is_space(caption.front())) caption.remove_prefix(1);
  while (!caption.empty() && is_space(caption.back())) caption.remove_suffix(1);
  return caption;
}

PromptTemplate::PromptTemplate(std::string name, std::string text)
    : name_(std::move(name)), text_(std::move(text)) {
  if (name_.empty()) throw Error(ErrorCode::kInvalidTemplate, "template name is empty");
  placeholder_ = text_.find(kCaptionPlaceholder);
  if (placeholder_ == std::string::npos ||
      text_.find(kCaptionPlaceholder, placeholder_ + 1) != std::string::npos) {
    throw Error(ErrorCode::kInvalidTemplate,
                "template '" + name_ + "' must contain exactly one {caption}");
  }
}

std::string_view PromptTemplate::prefix() const noexcept {
  return std::string_view(text_).substr(0, placeholder_);
}

std::string_view PromptTemplate::suffix() const noexcept {
  return std::string_view(text_).substr(placeholder_ + kCaptionPlaceholder.size());
}

std::string PromptTemplate::digest() const { return sha256_hex(text_); }

std::string PromptTemplate::render(std::string_view caption) const {
  const auto trimmed = trim_caption(caption);
  if (trimmed.empty()) throw Error(ErrorCode::kEmptyCaption, "caption is empty");
  std::string out;
  out.reserve(text_.size() + trimmed.size());
  out.append(prefix());
  out.append(trimmed);
  out.append(suffix());
  return out;
}

std::optional<std::string> PromptTemplate::match(std::string_view prompt) const {
  const auto pre = prefix();
  const auto suf = suffix();
  if (prompt.size() <= pre.size() + suf.size()) return std::nullopt;
  if (!prompt.starts_with(pre) || !prompt.ends_with(suf)) return std::nullopt;
  return std::string(prompt.substr(pre.size(), prompt.size() - pre.size() - suf.size()));
}

const TemplateLibrary& TemplateLibrary::builtin() {
  static const TemplateLibrary lib = [] {
    TemplateLibrary l;
    auto parsed = parse_template_file(embedded::kTemplatesJson);
    for (auto id : kAllStrategies) {
      bool found = false;
      for (auto& t : parsed) {
        if (t.name() == strategy_name(id)) {
          l.add(t);
          found = true;
        }
      }
      if (!found) {
        throw Error(ErrorCode::kInvalidTemplate,
                    "built-in template '" + std::string(strategy_name(id)) + "' missing");
      }
    }
    return l;
  }();
  return lib;
}

TemplateLibrary TemplateLibrary::with_user_json(std::string_view json_text) {
  TemplateLibrary lib = builtin();
  for (auto& t : parse_template_file(json_text)) {
    if (parse_strategy(t.name())) {
      if (t.text() == lib.get(t.name()).text()) continue;
      throw Error(ErrorCode::kInvalidTemplate,
                  "built-in strategy '" + t.name() + "' is read-only");
    }
    if (lib.contains(t.name())) {
      throw Error(ErrorCode::kInvalidTemplate, "strategy '" + t.name() + "' defined twice");
    }
    lib.add(std::move(t));
  }
  return lib;
}

TemplateLibrary TemplateLibrary::with_user_file(const std::filesystem::path& path) {
  return with_user_json(read_file(path));
}

void TemplateLibrary::add(PromptTemplate t) { templates_.push_back(std::move(t)); }

const PromptTemplate& TemplateLibrary::get(std::string_view name) const {
  for (const auto& t : templates_) {
    if (t.name() == name) return t;
  }
  throw Error(ErrorCode::kUnknownStrategy, "no strategy named '" + std::string(name) + "'");
}

bool TemplateLibrary::contains(std::string_view name) const {
  for (const auto& t : templates_) {
    if (t.name() == name) return true;
  }
  return false;
}

std::vector<std::string> TemplateLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& t : templates_) out.push_back(t.name());
  return out;
}

std::map<std::string, std::string> TemplateLibrary::digests() const {
  std::map<std::string, std::string> out;
  for (const auto& t : templates_) out.emplace(t.name(), t.digest());
  return out;
}

const PromptTemplate& template_for(StrategyId strategy) {
  return TemplateLibrary::builtin().get(strategy_name(strategy));
}

std::string render_prompt(StrategyId strategy, std::string_view caption) {
  return template_for(strategy).render(caption);
}

}  // namespace memaudit
