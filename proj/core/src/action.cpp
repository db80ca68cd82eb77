#include "wma/action.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <utility>
#include <vector>

#include "wma/error.hpp"

namespace wma {
namespace {

constexpr std::string_view kSummaryPhrase = "In summary, the next action I will perform is";

constexpr std::array<std::pair<ActionKind, std::string_view>, 8> kVerbs = {{
    {ActionKind::click, "click"},
    {ActionKind::type, "type"},
    {ActionKind::hover, "hover"},
    {ActionKind::scroll, "scroll"},
    {ActionKind::go_to, "goto"},
    {ActionKind::go_back, "go_back"},
    {ActionKind::stop, "stop"},
    {ActionKind::none, "none"},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Splits "[a] [b c] [d]" into {"a", "b c", "d"}. A ']' closes an argument
// only when it is followed by optional blanks and then '[' or the end, so
// arguments may themselves contain brackets.
std::vector<std::string> split_arguments(std::string_view s, std::string_view whole) {
  std::vector<std::string> args;
  s = trim(s);
  while (!s.empty()) {
    if (s.front() != '[') throw UnparseableAction("unexpected text '" + std::string(s) + "' in '" + std::string(whole) + "'");
    std::size_t close = std::string_view::npos;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i] != ']') continue;
      std::size_t next = i + 1;
      while (next < s.size() && (s[next] == ' ' || s[next] == '\t')) ++next;
      if (next == s.size() || s[next] == '[') {
        close = i;
        break;
      }
    }
    if (close == std::string_view::npos) throw UnparseableAction("unterminated argument in '" + std::string(whole) + "'");
    args.emplace_back(s.substr(1, close - 1));
    s = trim(s.substr(close + 1));
  }
  return args;
}

std::int64_t parse_target(const std::string& arg, std::string_view whole) {
  const std::string_view t = trim(arg);
  std::int64_t value = -1;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || value < 0) {
    throw UnparseableAction("element id '" + arg + "' is not a non-negative integer in '" + std::string(whole) + "'");
  }
  return value;
}

std::string_view extract_action_text(std::string_view output, std::optional<std::string>& rationale) {
  std::vector<std::pair<std::size_t, std::size_t>> fences;  // [begin, end) of block contents
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = output.find("```", pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = output.find("```", open + 3);
    if (close == std::string_view::npos) break;
    fences.emplace_back(open + 3, close);
    pos = close + 3;
  }
  if (fences.empty()) return trim(output);

  auto chosen = fences.back();
  if (const std::size_t summary = output.rfind(kSummaryPhrase); summary != std::string_view::npos) {
    for (const auto& fence : fences) {
      if (fence.first > summary) {
        chosen = fence;
        break;
      }
    }
  }
  const std::size_t block_start = chosen.first - 3;
  std::string_view before = trim(output.substr(0, block_start));
  if (!before.empty()) rationale = std::string(before);

  std::string_view block = trim(output.substr(chosen.first, chosen.second - chosen.first));
  // Tolerate a language tag on its own line, e.g. "```text\nclick [3]\n```".
  if (const std::size_t nl = block.find('\n'); nl != std::string_view::npos) {
    const std::string_view first_line = trim(block.substr(0, nl));
    if (!first_line.empty() && first_line.find('[') == std::string_view::npos &&
        !action_kind_from_string(lower(first_line))) {
      block = trim(block.substr(nl + 1));
    }
  }
  return block;
}

}  // namespace

std::string_view to_string(ActionKind kind) noexcept {
  for (const auto& [k, verb] : kVerbs) {
    if (k == kind) return verb;
  }
  return "none";
}

std::optional<ActionKind> action_kind_from_string(std::string_view verb) noexcept {
  for (const auto& [k, v] : kVerbs) {
    if (v == verb) return k;
  }
  return std::nullopt;
}

Action Action::click(std::int64_t target) { return Action{ActionKind::click, target, {}, {}, {}}; }
Action Action::hover(std::int64_t target) { return Action{ActionKind::hover, target, {}, {}, {}}; }
Action Action::type(std::int64_t target, std::string text, bool press_enter) {
  return Action{ActionKind::type, target, std::move(text), press_enter, {}};
}
Action Action::scroll(std::string direction) { return Action{ActionKind::scroll, {}, std::move(direction), {}, {}}; }
Action Action::go_to(std::string url) { return Action{ActionKind::go_to, {}, std::move(url), {}, {}}; }
Action Action::go_back() { return Action{ActionKind::go_back, {}, {}, {}, {}}; }
Action Action::stop(std::optional<std::string> answer) { return Action{ActionKind::stop, {}, std::move(answer), {}, {}}; }
Action Action::none() { return Action{}; }

void validate(const Action& action) {
  const std::string verb(to_string(action.kind));
  switch (action.kind) {
    case ActionKind::click:
    case ActionKind::hover:
      if (!action.target) throw UnparseableAction(verb + " requires a target element");
      if (action.text || action.press_enter) throw UnparseableAction(verb + " takes no text argument");
      break;
    case ActionKind::type:
      if (!action.target) throw UnparseableAction("type requires a target element");
      if (!action.text) throw UnparseableAction("type requires text");
      if (!action.press_enter) throw UnparseableAction("type requires press_enter");
      break;
    case ActionKind::scroll:
      if (!action.text || (*action.text != "up" && *action.text != "down")) {
        throw UnparseableAction("scroll direction must be 'up' or 'down'");
      }
      if (action.target || action.press_enter) throw UnparseableAction("scroll takes only a direction");
      break;
    case ActionKind::go_to:
      if (!action.text || trim(*action.text).empty()) throw UnparseableAction("goto requires a URL");
      if (action.target || action.press_enter) throw UnparseableAction("goto takes only a URL");
      break;
    case ActionKind::stop:
      if (action.target || action.press_enter) throw UnparseableAction("stop takes only an answer");
      break;
    case ActionKind::go_back:
    case ActionKind::none:
      if (action.target || action.text || action.press_enter) throw UnparseableAction(verb + " takes no arguments");
      break;
  }
}

std::string render_action(const Action& action) {
  validate(action);
  std::string out(to_string(action.kind));
  auto arg = [&](const std::string& value) { out += " [" + value + "]"; };
  switch (action.kind) {
    case ActionKind::click:
    case ActionKind::hover:
      arg(std::to_string(*action.target));
      break;
    case ActionKind::type:
      arg(std::to_string(*action.target));
      arg(*action.text);
      arg(*action.press_enter ? "1" : "0");
      break;
    case ActionKind::scroll:
    case ActionKind::go_to:
      arg(*action.text);
      break;
    case ActionKind::stop:
      if (action.text) arg(*action.text);
      break;
    case ActionKind::go_back:
    case ActionKind::none:
      break;
  }
  return out;
}

Action parse_action(std::string_view model_output) {
  std::optional<std::string> rationale;
  const std::string_view text = extract_action_text(model_output, rationale);
  if (text.empty()) throw UnparseableAction("empty action");

  std::size_t verb_end = 0;
  while (verb_end < text.size() && !std::isspace(static_cast<unsigned char>(text[verb_end])) &&
         text[verb_end] != '[') {
    ++verb_end;
  }
  const std::string verb = lower(text.substr(0, verb_end));
  const auto kind = action_kind_from_string(verb);
  if (!kind) throw UnparseableAction("unknown action verb '" + verb + "' in '" + std::string(text) + "'");

  const std::vector<std::string> args = split_arguments(text.substr(verb_end), text);
  auto expect_args = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) {
      throw UnparseableAction("wrong number of arguments for " + verb + " in '" + std::string(text) + "'");
    }
  };

  Action action;
  action.kind = *kind;
  switch (*kind) {
    case ActionKind::click:
    case ActionKind::hover:
      expect_args(1, 1);
      action.target = parse_target(args[0], text);
      break;
    case ActionKind::type: {
      expect_args(2, 3);
      action.target = parse_target(args[0], text);
      action.text = args[1];
      bool enter = true;
      if (args.size() == 3) {
        const std::string_view flag = trim(args[2]);
        if (flag == "1") {
          enter = true;
        } else if (flag == "0") {
          enter = false;
        } else {
          throw UnparseableAction("press_enter flag must be 0 or 1 in '" + std::string(text) + "'");
        }
      }
      action.press_enter = enter;
      break;
    }
    case ActionKind::scroll:
      expect_args(1, 1);
      action.text = lower(trim(args[0]));
      break;
    case ActionKind::go_to:
      expect_args(1, 1);
      action.text = std::string(trim(args[0]));
      break;
    case ActionKind::stop:
      expect_args(0, 1);
      if (!args.empty()) action.text = args[0];
      break;
    case ActionKind::go_back:
    case ActionKind::none:
      expect_args(0, 0);
      break;
  }
  validate(action);
  action.rationale = std::move(rationale);
  return action;
}

}  // namespace wma
