#include "wma/abstraction.hpp"

#include <algorithm>

#include "wma/digest.hpp"
#include "wma/error.hpp"
#include "wma/serialize.hpp"

namespace wma {

std::string_view to_string(AbstractionMode mode) noexcept {
  return mode == AbstractionMode::model ? "model" : "template";
}

namespace {

std::string property_suffix(const AxElement& e) {
  std::string out;
  for (const Property& p : e.extra) out += p.key.empty() ? " " + p.value : " " + p.key + ": " + p.value;
  return out;
}

std::string describe_element(const AxElement& e) { return e.role + " '" + e.name + "'"; }

std::string join_fields(const std::vector<std::string>& fields) {
  std::string out;
  for (const std::string& f : fields) out += (out.empty() ? "" : ", ") + f;
  return out;
}

std::string render_elements(const std::vector<AxElement>& elements) {
  std::string out;
  for (const AxElement& e : elements) out += (out.empty() ? "" : "\n") + render_element(e);
  return out.empty() ? "(none)" : out;
}

}  // namespace

std::string render_delta_text(const TransitionDelta& delta) {
  if (delta.empty()) return std::string(kNoObservableChange);
  std::vector<std::string> sections;
  if (!delta.added.empty()) {
    std::string s = "[ADDED]";
    for (const AxElement& e : delta.added) s += "\n- " + describe_element(e);
    sections.push_back(std::move(s));
  }
  if (!delta.deleted.empty()) {
    std::string s = "[DELETED]";
    for (const AxElement& e : delta.deleted) s += "\n- " + describe_element(e);
    sections.push_back(std::move(s));
  }
  if (!delta.updated.empty()) {
    std::string s = "[UPDATED]";
    for (const UpdatedElement& u : delta.updated) {
      const bool props = std::find(u.changed_fields.begin(), u.changed_fields.end(), "properties") !=
                         u.changed_fields.end();
      const bool role = u.old_element.role != u.new_element.role;
      std::string left = describe_element(u.old_element);
      std::string right = (role ? u.new_element.role + " " : "") + "'" + u.new_element.name + "'";
      if (props) {
        left += property_suffix(u.old_element);
        right += property_suffix(u.new_element);
      }
      s += "\n- " + left + " → " + right + " (" + join_fields(u.changed_fields) + ")";
    }
    sections.push_back(std::move(s));
  }
  std::string out;
  for (const std::string& s : sections) out += (out.empty() ? "" : "\n\n") + s;
  return out;
}

std::string delta_digest(const TransitionDelta& delta) { return short_digest(to_json(delta).dump()); }

AbstractedObservation describe_transition(const Instruction& instruction, const AxTree& before, const Action& action,
                                          const TransitionDelta& delta, const ModelClient& model,
                                          const AbstractionOptions& options, const std::vector<AxElement>* tao,
                                          const PromptLibrary& prompts) {
  AbstractedObservation result;
  result.source_delta_digest = delta_digest(delta);
  result.text = render_delta_text(delta);
  if (!options.use_model) return result;
  if (!model.available()) {
    result.warning = "abstraction model unavailable; template text used";
    return result;
  }

  // One call with a single retry on an empty reply.
  auto ask = [&](std::string_view prompt, const PromptSlots& slots) -> std::optional<std::string> {
    for (int attempt = 0; attempt < 2; ++attempt) {
      const ChatResponse response = model.complete(model.make_request(prompts.render(prompt, slots)));
      if (!response.choices.empty() && !normalize_whitespace(response.choices.front()).empty()) {
        return response.choices.front();
      }
    }
    return std::nullopt;
  };

  try {
    std::string tao_text = tao ? render_elements(*tao) : "(none)";
    PromptSlots slots = {{"objective", instruction.goal_text},
                         {"action", render_action(action)},
                         {"delta", result.text},
                         {"tao_state", tao_text},
                         {"observation", options.include_observation ? before.source_text : "(omitted)"}};
    if (options.two_stage) {
      const auto refined = ask("refine_tao", slots);
      if (!refined) {
        result.warning = "abstraction model returned empty replies; template text used";
        return result;
      }
      slots["tao_state"] = *refined;
    }
    const auto described = ask("transition_abstraction", slots);
    if (!described) {
      result.warning = "abstraction model returned empty replies; template text used";
      return result;
    }
    result.text = *described;
    result.mode = AbstractionMode::model;
  } catch (const BackendError& e) {
    result.warning = std::string("abstraction model failed (") + e.what() + "); template text used";
  }
  return result;
}

}  // namespace wma
