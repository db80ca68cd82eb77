#pragma once

#include <nlohmann/json.hpp>

#include "wma/action.hpp"
#include "wma/ax_tree.hpp"
#include "wma/diff.hpp"

namespace wma {

nlohmann::json to_json(const AxElement& element);
AxElement ax_element_from_json(const nlohmann::json& j);

/// {"added": [...], "deleted": [...], "updated": [{"old", "new",
/// "changed_fields"}], "unchanged_count": n}
nlohmann::json to_json(const TransitionDelta& delta);
TransitionDelta transition_delta_from_json(const nlohmann::json& j);

/// {"kind", "target"?, "text"?, "press_enter"?, "canonical"}
nlohmann::json to_json(const Action& action);
Action action_from_json(const nlohmann::json& j);

/// Unknown keys raise ConfigError with the offending key path.
nlohmann::json to_json(const MatchWeights& weights);
MatchWeights match_weights_from_json(const nlohmann::json& j, const std::string& path = "/match");

}  // namespace wma
