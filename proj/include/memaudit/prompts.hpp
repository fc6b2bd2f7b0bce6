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

// Prompt strategies and their caption templates.
//
// The four built-in templates ship in data/templates.json and are compiled
// into the library; user strategies load from files in the same format and
// may not redefine a built-in.

#ifndef MEMAUDIT_PROMPTS_HPP_
#define MEMAUDIT_PROMPTS_HPP_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memaudit {

enum class StrategyId { kBaseline, kTaskInstruction, kNegation, kChainOfThought };

inline constexpr std::array<StrategyId, 4> kAllStrategies = {
    StrategyId::kBaseline, StrategyId::kTaskInstruction, StrategyId::kNegation,
    StrategyId::kChainOfThought};

inline constexpr std::string_view kCaptionPlaceholder = "{caption}";

std::string_view strategy_name(StrategyId id);
std::optional<StrategyId> parse_strategy(std::string_view name);

class PromptTemplate {
 public:
  // Throws InvalidTemplate unless `text` holds exactly one placeholder.
  PromptTemplate(std::string name, std::string text);

  const std::string& name() const noexcept { return name_; }
  const std::string& text() const noexcept { return text_; }
  std::string_view prefix() const noexcept;
  std::string_view suffix() const noexcept;
  std::string digest() const;

  // Leading and trailing whitespace of the caption is trimmed; the caption
  // is otherwise inserted verbatim. Throws EmptyCaption.
  std::string render(std::string_view caption) const;
  // Inverse of render: the caption if `prompt` has this template's shape.
  std::optional<std::string> match(std::string_view prompt) const;

 private:
  std::string name_;
  std::string text_;
  std::size_t placeholder_ = 0;
};

class TemplateLibrary {
 public:
  // Library holding only the four built-ins.
  static const TemplateLibrary& builtin();

  // Built-ins plus the user templates in `path`. Throws InvalidTemplate on
  // a redefined built-in or a malformed entry.
  static TemplateLibrary with_user_file(const std::filesystem::path& path);
  static TemplateLibrary with_user_json(std::string_view json_text);

  const PromptTemplate& get(std::string_view name) const;  // UnknownStrategy
  bool contains(std::string_view name) const;
  // Built-ins in canonical order, then user strategies by name.
  std::vector<std::string> names() const;
  std::map<std::string, std::string> digests() const;

 private:
  TemplateLibrary() = default;
  void add(PromptTemplate t);

  std::vector<PromptTemplate> templates_;
};

const PromptTemplate& template_for(StrategyId strategy);
std::string render_prompt(StrategyId strategy, std::string_view caption);

// Whitespace trimming applied to captions before substitution.
std::string_view trim_caption(std::string_view caption);

}  // namespace memaudit

#endif  // MEMAUDIT_PROMPTS_HPP_
