#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wma/environment.hpp"
#include "wma/instruction.hpp"

namespace wma {

struct GoalSpec {
  enum class Kind { reach_page, answer_exact, answer_contains };
  Kind kind = Kind::reach_page;
  std::string value;
};

/// Which actions a transition reacts to. Unset fields match anything. The
/// target may be given by element id or by (role, name) on the source page.
struct ActionMatcher {
  ActionKind kind = ActionKind::click;
  std::optional<std::int64_t> target;
  std::optional<std::string> role;
  std::optional<std::string> name;
  /// Compared case-insensitively after trimming (typed text, scroll
  /// direction, goto URL).
  std::optional<std::string> text;
  std::optional<bool> press_enter;
};

struct Transition {
  std::string from;
  ActionMatcher match;
  std::string to;
  /// Firing this transition ends the episode with this answer.
  std::optional<std::string> answer;
};

struct Page {
  std::string id;
  std::string url;
  AxTree tree;
};

struct ScenarioTask {
  Instruction instruction;
  std::string start;
  GoalSpec goal;
  /// A known-good action sequence, in canonical action form.
  std::vector<std::string> gold;
};

/// A scripted micro-site: pages, transitions between them and tasks.
struct Scenario {
  std::string name;
  std::map<std::string, Page> pages;
  std::vector<Transition> transitions;
  std::vector<ScenarioTask> tasks;

  const ScenarioTask& task(const std::string& id) const;
  const ScenarioTask& task(std::size_t index) const;
  const Page& page(const std::string& id) const;
  /// Page whose url equals `url`, or nullptr.
  const Page* page_by_url(const std::string& url) const;
};

/// Parses and validates a scenario document. Schema violations raise
/// SchemaError with a JSON pointer; references to unknown pages or tasks
/// raise DanglingReference.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

/// Goal test on the final page id and the stop answer.
bool check_goal(const GoalSpec& goal, const std::string& final_page, const std::optional<std::string>& answer);

/// Deterministic environment driven by a Scenario.
class SandboxEnv final : public Environment {
 public:
  SandboxEnv(std::shared_ptr<const Scenario> scenario, const std::string& task_id);

  /// Restarts the current task and invalidates all earlier snapshots.
  void reset();
  /// Switches to a fresh copy of the scenario, invalidating snapshots.
  void reload(std::shared_ptr<const Scenario> scenario);

  const AxTree& observation() const override;
  const AxTree& step(const Action& action) override;
  bool terminated() const override { return terminated_; }
  std::optional<std::string> answer() const override { return answer_; }
  std::size_t executions() const override { return executions_; }
  EnvSnapshot snapshot() const override;
  void restore(const EnvSnapshot& snapshot) override;

  const std::string& current_page() const noexcept { return page_; }
  const ScenarioTask& task() const noexcept { return *task_; }
  const Scenario& scenario() const noexcept { return *scenario_; }
  bool goal_met() const;

 private:
  std::shared_ptr<const Scenario> scenario_;
  const ScenarioTask* task_ = nullptr;
  std::string task_id_;
  std::string page_;
  std::vector<std::string> back_stack_;
  bool terminated_ = false;
  std::optional<std::string> answer_;
  std::size_t executions_ = 0;
  std::uint64_t generation_ = 0;
};

}  // namespace wma
