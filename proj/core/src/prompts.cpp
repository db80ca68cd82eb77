#include "wma/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "wma/error.hpp"

namespace wma {
namespace detail {
const std::map<std::string, std::string>& embedded_prompt_assets();
}  // namespace detail

namespace {

constexpr std::string_view kSystemHeader = "=== system ===";
constexpr std::string_view kUserHeader = "=== user ===";

std::string_view strip_newlines(std::string_view s) {
  while (!s.empty() && (s.front() == '\n' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> PromptTemplate::slots() const {
  std::set<std::string> found;
  for (const std::string* text : {&system, &user}) {
    std::size_t pos = 0;
    while ((pos = text->find("{{", pos)) != std::string::npos) {
      const std::size_t end = text->find("}}", pos + 2);
      if (end == std::string::npos) break;
      found.insert(text->substr(pos + 2, end - pos - 2));
      pos = end + 2;
    }
  }
  return {found.begin(), found.end()};
}

std::string fill_template(std::string_view text, const PromptSlots& slots) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const std::string_view slot = text.substr(open + 2, close - open - 2);
    const auto it = slots.find(slot);
    if (it == slots.end()) throw InvalidArgument("prompt slot '" + std::string(slot) + "' has no value");
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

std::string prompt_tag(std::string_view name) { return "[task: " + std::string(name) + "]"; }

PromptTemplate parse_prompt_asset(std::string_view name, std::string_view text) {
  PromptTemplate prompt;
  prompt.name = std::string(name);
  const std::size_t separator = text.find("\n---\n");
  if (separator == std::string_view::npos) {
    throw InvalidArgument("prompt asset '" + prompt.name + "' lacks a '---' front-matter separator");
  }
  std::istringstream header{std::string(text.substr(0, separator))};
  for (std::string line; std::getline(header, line);) {
    if (line.rfind("version:", 0) == 0) prompt.version = std::stoi(line.substr(8));
  }
  if (prompt.version <= 0) throw InvalidArgument("prompt asset '" + prompt.name + "' lacks a positive version");

  const std::string_view body = text.substr(separator + 5);
  const std::size_t system_at = body.find(kSystemHeader);
  const std::size_t user_at = body.find(kUserHeader);
  if (user_at == std::string_view::npos) throw InvalidArgument("prompt asset '" + prompt.name + "' has no user section");
  if (system_at != std::string_view::npos && system_at < user_at) {
    const std::size_t start = system_at + kSystemHeader.size();
    prompt.system = std::string(strip_newlines(body.substr(start, user_at - start)));
  }
  prompt.user = std::string(strip_newlines(body.substr(user_at + kUserHeader.size())));
  return prompt;
}

const PromptLibrary& PromptLibrary::embedded() {
  static const PromptLibrary library = [] {
    PromptLibrary lib;
    for (const auto& [name, text] : detail::embedded_prompt_assets()) {
      lib.templates_.emplace(name, parse_prompt_asset(name, text));
    }
    return lib;
  }();
  return library;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& directory) {
  PromptLibrary lib;
  if (!std::filesystem::is_directory(directory)) {
    throw InvalidArgument("prompt directory '" + directory.string() + "' does not exist");
  }
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream content;
    content << in.rdbuf();
    const std::string name = entry.path().stem().string();
    lib.templates_.emplace(name, parse_prompt_asset(name, content.str()));
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(std::string_view name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) throw InvalidArgument("unknown prompt asset '" + std::string(name) + "'");
  return it->second;
}

bool PromptLibrary::contains(std::string_view name) const { return templates_.find(name) != templates_.end(); }

std::vector<std::string> PromptLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : templates_) out.push_back(name);
  return out;
}

std::vector<ChatMessage> PromptLibrary::render(std::string_view name, const PromptSlots& slots) const {
  const PromptTemplate& prompt = get(name);
  std::vector<ChatMessage> messages;
  if (!prompt.system.empty()) messages.push_back({"system", fill_template(prompt.system, slots)});
  messages.push_back({"user", fill_template(prompt.user, slots)});
  return messages;
}

}  // namespace wma
