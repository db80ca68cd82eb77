#include "wma/serialize.hpp"

#include "wma/error.hpp"

namespace wma {

nlohmann::json to_json(const AxElement& element) {
  nlohmann::json extra = nlohmann::json::array();
  for (const Property& p : element.extra) extra.push_back({{"key", p.key}, {"value", p.value}});
  return {{"elem_id", element.elem_id}, {"role", element.role},   {"name", element.name},
          {"depth", element.depth},     {"line_index", element.line_index}, {"extra", extra}};
}

AxElement ax_element_from_json(const nlohmann::json& j) {
  AxElement element;
  element.elem_id = j.at("elem_id").get<std::int64_t>();
  element.role = j.at("role").get<std::string>();
  element.name = j.at("name").get<std::string>();
  element.depth = j.value("depth", std::size_t{0});
  element.line_index = j.value("line_index", std::size_t{0});
  if (j.contains("extra")) {
    for (const auto& p : j.at("extra")) element.extra.push_back({p.at("key"), p.at("value")});
  }
  return element;
}

nlohmann::json to_json(const TransitionDelta& delta) {
  nlohmann::json added = nlohmann::json::array();
  nlohmann::json deleted = nlohmann::json::array();
  nlohmann::json updated = nlohmann::json::array();
  for (const AxElement& e : delta.added) added.push_back(to_json(e));
  for (const AxElement& e : delta.deleted) deleted.push_back(to_json(e));
  for (const UpdatedElement& u : delta.updated) {
    updated.push_back(
        {{"old", to_json(u.old_element)}, {"new", to_json(u.new_element)}, {"changed_fields", u.changed_fields}});
  }
  return {{"added", added}, {"deleted", deleted}, {"updated", updated}, {"unchanged_count", delta.unchanged_count}};
}

TransitionDelta transition_delta_from_json(const nlohmann::json& j) {
  TransitionDelta delta;
  for (const auto& e : j.at("added")) delta.added.push_back(ax_element_from_json(e));
  for (const auto& e : j.at("deleted")) delta.deleted.push_back(ax_element_from_json(e));
  for (const auto& u : j.at("updated")) {
    delta.updated.push_back({ax_element_from_json(u.at("old")), ax_element_from_json(u.at("new")),
                             u.at("changed_fields").get<std::vector<std::string>>()});
  }
  delta.unchanged_count = j.value("unchanged_count", std::size_t{0});
  return delta;
}

nlohmann::json to_json(const Action& action) {
  nlohmann::json j = {{"kind", std::string(to_string(action.kind))}};
  if (action.target) j["target"] = *action.target;
  if (action.text) j["text"] = *action.text;
  if (action.press_enter) j["press_enter"] = *action.press_enter;
  j["canonical"] = render_action(action);
  return j;
}

Action action_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_action(j.get<std::string>());
  const auto kind = action_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw UnparseableAction("unknown action kind '" + j.at("kind").get<std::string>() + "'");
  Action action;
  action.kind = *kind;
  if (j.contains("target")) action.target = j.at("target").get<std::int64_t>();
  if (j.contains("text")) action.text = j.at("text").get<std::string>();
  if (j.contains("press_enter")) action.press_enter = j.at("press_enter").get<bool>();
  validate(action);
  return action;
}

nlohmann::json to_json(const MatchWeights& w) {
  nlohmann::json j = {{"w_name", w.w_name},
                      {"w_role", w.w_role},
                      {"w_loc", w.w_loc},
                      {"tau", w.tau},
                      {"x_limit", w.x_limit},
                      {"y_limit", w.y_limit},
                      {"match_threshold", w.match_threshold},
                      {"tao_mode", w.tao_mode == TaoMode::strict ? "strict" : "threshold"},
                      {"printed_sign", w.printed_sign}};
  j["dummy_cost"] = w.dummy_cost ? nlohmann::json(*w.dummy_cost) : nlohmann::json(nullptr);
  return j;
}

MatchWeights match_weights_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  MatchWeights w;
  for (const auto& [key, value] : j.items()) {
    const std::string at = path + "/" + key;
    try {
      if (key == "w_name") {
        w.w_name = value.get<double>();
      } else if (key == "w_role") {
        w.w_role = value.get<double>();
      } else if (key == "w_loc") {
        w.w_loc = value.get<double>();
      } else if (key == "tau") {
        w.tau = value.get<double>();
      } else if (key == "x_limit") {
        w.x_limit = value.get<std::size_t>();
      } else if (key == "y_limit") {
        w.y_limit = value.get<std::size_t>();
      } else if (key == "match_threshold") {
        w.match_threshold = value.get<double>();
      } else if (key == "dummy_cost") {
        if (!value.is_null()) w.dummy_cost = value.get<double>();
      } else if (key == "tao_mode") {
        const std::string mode = value.get<std::string>();
        if (mode == "strict") {
          w.tao_mode = TaoMode::strict;
        } else if (mode == "threshold") {
          w.tao_mode = TaoMode::threshold;
        } else {
          throw ConfigError(at, "expected 'strict' or 'threshold'");
        }
      } else if (key == "printed_sign") {
        w.printed_sign = value.get<bool>();
      } else {
        throw ConfigError(at, "unknown key");
      }
    } catch (const nlohmann::json::type_error& e) {
      throw ConfigError(at, e.what());
    }
  }
  try {
    w.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
  return w;
}

}  // namespace wma
