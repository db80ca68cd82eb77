#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wma/action.hpp"
#include "wma/ax_tree.hpp"
#include "wma/diff.hpp"
#include "wma/gateway.hpp"
#include "wma/instruction.hpp"
#include "wma/prompts.hpp"

namespace wma {

enum class AbstractionMode { template_text, model };

std::string_view to_string(AbstractionMode mode) noexcept;

/// Transition-focused description of the next observation.
struct AbstractedObservation {
  std::string text;
  AbstractionMode mode = AbstractionMode::template_text;
  /// short_digest of the serialized delta the text was produced from.
  std::string source_delta_digest;
  /// Set when model mode was requested but the template had to be used.
  std::optional<std::string> warning;
};

/// The text used when a transition changes nothing.
inline constexpr std::string_view kNoObservableChange = "No observable change.";

/// Sectioned text listing ADDED, DELETED and UPDATED elements:
///
///     [ADDED]
///     - button 'Submit'
///
///     [UPDATED]
///     - link 'Cart (0)' → 'Cart (1)' (name)
///
/// Pure function of the delta.
std::string render_delta_text(const TransitionDelta& delta);

/// short_digest of the delta's JSON form.
std::string delta_digest(const TransitionDelta& delta);

struct AbstractionOptions {
  /// Ask the abstraction model for a free-form description. When false, or
  /// when no model is available, the template text is returned.
  bool use_model = false;
  /// Show the full previous observation to the model, not only the delta.
  bool include_observation = false;
  /// First refine the TaO elements with a separate prompt, then describe.
  bool two_stage = false;
};

/// Produces the abstracted next observation for one transition. `tao` holds
/// the transition-aware elements of the next observation when known.
///
/// Model failures (unavailable backend, empty replies after one retry) fall
/// back to the template text with `warning` set.
AbstractedObservation describe_transition(const Instruction& instruction, const AxTree& before, const Action& action,
                                          const TransitionDelta& delta, const ModelClient& model,
                                          const AbstractionOptions& options,
                                          const std::vector<AxElement>* tao = nullptr,
                                          const PromptLibrary& prompts = PromptLibrary::embedded());

}  // namespace wma
