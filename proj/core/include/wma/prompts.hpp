#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wma/chat.hpp"

namespace wma {

/// A versioned prompt asset. Asset files look like
///
///     version: 1
///     ---
///     === system ===
///     ...
///     === user ===
///     [task: <name>]
///     ... {{slot}} ...
///
/// Every user section starts with its `[task: <name>]` tag so scripted
/// backends can tell prompts apart.
struct PromptTemplate {
  std::string name;
  int version = 0;
  std::string system;
  std::string user;

  /// Slot names referenced by the template, sorted and unique.
  std::vector<std::string> slots() const;
};

using PromptSlots = std::map<std::string, std::string, std::less<>>;

/// Replaces every {{slot}} in one pass. Inserted values are not rescanned.
/// Throws InvalidArgument when a referenced slot has no value.
std::string fill_template(std::string_view text, const PromptSlots& slots);

/// The `[task: <name>]` tag heading a prompt's user message.
std::string prompt_tag(std::string_view name);

PromptTemplate parse_prompt_asset(std::string_view name, std::string_view text);

class PromptLibrary {
 public:
  /// Assets compiled into the library from core/assets/prompts.
  static const PromptLibrary& embedded();
  /// Loads every *.txt asset in `directory`.
  static PromptLibrary from_directory(const std::filesystem::path& directory);

  const PromptTemplate& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;

  /// System + user messages with slots filled in.
  std::vector<ChatMessage> render(std::string_view name, const PromptSlots& slots) const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace wma
