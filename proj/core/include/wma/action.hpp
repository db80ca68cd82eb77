#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace wma {

enum class ActionKind { click, type, hover, scroll, go_to, go_back, stop, none };

std::string_view to_string(ActionKind kind) noexcept;
std::optional<ActionKind> action_kind_from_string(std::string_view verb) noexcept;

/// A web action in the WebArena verb set.
///
/// Canonical text forms:
///
///     click [42]            hover [42]
///     type [7] [hello] [1]  scroll [down]
///     goto [http://...]     go_back
///     stop [answer]         stop
///     none
///
/// `rationale` carries the model's reasoning, if any. It is not part of the
/// canonical form and does not take part in equality.
struct Action {
  ActionKind kind = ActionKind::none;
  std::optional<std::int64_t> target;
  std::optional<std::string> text;
  std::optional<bool> press_enter;
  std::optional<std::string> rationale;

  static Action click(std::int64_t target);
  static Action hover(std::int64_t target);
  static Action type(std::int64_t target, std::string text, bool press_enter = true);
  static Action scroll(std::string direction);
  static Action go_to(std::string url);
  static Action go_back();
  static Action stop(std::optional<std::string> answer = std::nullopt);
  static Action none();

  bool operator==(const Action& other) const noexcept {
    return kind == other.kind && target == other.target && text == other.text &&
           press_enter == other.press_enter;
  }
};

/// Throws UnparseableAction when the invariants of `action.kind` do not hold.
void validate(const Action& action);

/// Deterministic canonical rendering. parse_action(render_action(a)) == a.
std::string render_action(const Action& action);

/// Extracts the action from a model completion. When the output contains
/// fenced blocks, the block following "In summary, the next action I will
/// perform is" wins, otherwise the last block; without fences the whole
/// string is parsed. Unknown verbs and trailing garbage raise
/// UnparseableAction.
Action parse_action(std::string_view model_output);

}  // namespace wma
