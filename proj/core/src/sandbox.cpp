#include "wma/sandbox.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>

#include "wma/error.hpp"

namespace wma {

EnvSnapshot Environment::snapshot() const { throw SnapshotUnsupported("environment does not support snapshots"); }

void Environment::restore(const EnvSnapshot&) { throw SnapshotUnsupported("environment does not support snapshots"); }

namespace {

std::atomic<std::uint64_t> g_generation{0};

std::string folded(std::string_view text) {
  std::string out = normalize_whitespace(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trimmed(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

// Small helpers that turn JSON type problems into SchemaError with a pointer.
const nlohmann::json& field(const nlohmann::json& j, const std::string& key, const std::string& at) {
  if (!j.is_object()) throw SchemaError(at, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(at + "/" + key, "missing required field");
  return *it;
}

std::string string_field(const nlohmann::json& j, const std::string& key, const std::string& at) {
  const nlohmann::json& v = field(j, key, at);
  if (!v.is_string()) throw SchemaError(at + "/" + key, "expected a string");
  return v.get<std::string>();
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known, const std::string& at) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw SchemaError(at + "/" + key, "unknown field");
  }
}

ActionMatcher parse_matcher(const nlohmann::json& j, const std::string& at) {
  reject_unknown(j, {"kind", "target", "role", "name", "text", "press_enter"}, at);
  ActionMatcher m;
  const auto kind = action_kind_from_string(string_field(j, "kind", at));
  if (!kind) throw SchemaError(at + "/kind", "unknown action kind");
  m.kind = *kind;
  if (j.contains("target")) {
    if (!j["target"].is_number_integer()) throw SchemaError(at + "/target", "expected an integer");
    m.target = j["target"].get<std::int64_t>();
  }
  if (j.contains("role")) m.role = string_field(j, "role", at);
  if (j.contains("name")) m.name = string_field(j, "name", at);
  if (m.role.has_value() != m.name.has_value()) throw SchemaError(at, "role and name must be given together");
  if (j.contains("text")) m.text = string_field(j, "text", at);
  if (j.contains("press_enter")) {
    if (!j["press_enter"].is_boolean()) throw SchemaError(at + "/press_enter", "expected a boolean");
    m.press_enter = j["press_enter"].get<bool>();
  }
  return m;
}

GoalSpec parse_goal(const nlohmann::json& j, const std::string& at) {
  reject_unknown(j, {"kind", "value"}, at);
  GoalSpec goal;
  const std::string kind = string_field(j, "kind", at);
  if (kind == "reach_page") {
    goal.kind = GoalSpec::Kind::reach_page;
  } else if (kind == "answer_exact") {
    goal.kind = GoalSpec::Kind::answer_exact;
  } else if (kind == "answer_contains") {
    goal.kind = GoalSpec::Kind::answer_contains;
  } else {
    throw SchemaError(at + "/kind", "unknown goal kind '" + kind + "'");
  }
  goal.value = string_field(j, "value", at);
  if (goal.value.empty()) throw SchemaError(at + "/value", "must be non-empty");
  return goal;
}

std::string tree_text(const nlohmann::json& j, const std::string& at) {
  if (j.is_string()) return j.get<std::string>();
  if (!j.is_array()) throw SchemaError(at, "expected a string or an array of lines");
  std::string text;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) throw SchemaError(at + "/" + std::to_string(i), "expected a string");
    if (i > 0) text += '\n';
    text += j[i].get<std::string>();
  }
  return text;
}

bool matches(const ActionMatcher& m, const Action& action, const Page& page) {
  if (action.kind != m.kind) return false;
  if (m.target && action.target != m.target) return false;
  if (m.role) {
    if (!action.target) return false;
    const AxElement* element = page.tree.find(*action.target);
    if (element == nullptr || element->role != *m.role || element->name != *m.name) return false;
  }
  if (m.text && (!action.text || folded(*action.text) != folded(*m.text))) return false;
  if (m.press_enter && action.press_enter != m.press_enter) return false;
  return true;
}

}  // namespace

const ScenarioTask& Scenario::task(const std::string& id) const {
  for (const ScenarioTask& t : tasks) {
    if (t.instruction.id == id) return t;
  }
  throw InvalidArgument("scenario '" + name + "' has no task '" + id + "'");
}

const ScenarioTask& Scenario::task(std::size_t index) const {
  if (index >= tasks.size()) throw InvalidArgument("task index " + std::to_string(index) + " out of range");
  return tasks[index];
}

const Page& Scenario::page(const std::string& id) const {
  const auto it = pages.find(id);
  if (it == pages.end()) throw DanglingReference("unknown page '" + id + "'");
  return it->second;
}

const Page* Scenario::page_by_url(const std::string& url) const {
  for (const auto& [_, page] : pages) {
    if (page.url == url) return &page;
  }
  return nullptr;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"schema_version", "name", "pages", "transitions", "tasks"}, "");
  const nlohmann::json& version = field(j, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != 1) throw SchemaError("/schema_version", "expected 1");

  Scenario scenario;
  scenario.name = string_field(j, "name", "");

  const nlohmann::json& pages = field(j, "pages", "");
  if (!pages.is_object() || pages.empty()) throw SchemaError("/pages", "expected a non-empty object");
  for (const auto& [id, p] : pages.items()) {
    const std::string at = "/pages/" + id;
    reject_unknown(p, {"url", "tree"}, at);
    Page page;
    page.id = id;
    page.url = p.contains("url") ? string_field(p, "url", at) : "http://" + scenario.name + ".local/" + id;
    try {
      page.tree = parse_axtree(tree_text(field(p, "tree", at), at + "/tree"));
    } catch (const MalformedLine& e) {
      throw SchemaError(at + "/tree", e.what());
    }
    page.tree.url = page.url;
    scenario.pages.emplace(id, std::move(page));
  }

  const nlohmann::json& transitions = field(j, "transitions", "");
  if (!transitions.is_array()) throw SchemaError("/transitions", "expected an array");
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const std::string at = "/transitions/" + std::to_string(i);
    const nlohmann::json& t = transitions[i];
    reject_unknown(t, {"from", "action", "to", "answer"}, at);
    Transition transition;
    transition.from = string_field(t, "from", at);
    transition.to = string_field(t, "to", at);
    transition.match = parse_matcher(field(t, "action", at), at + "/action");
    if (t.contains("answer")) transition.answer = string_field(t, "answer", at);
    for (const std::string* ref : {&transition.from, &transition.to}) {
      if (scenario.pages.count(*ref) == 0) throw DanglingReference(at + ": unknown page '" + *ref + "'");
    }
    const Page& source = scenario.pages.at(transition.from);
    if (transition.match.target && source.tree.find(*transition.match.target) == nullptr) {
      throw DanglingReference(at + ": page '" + transition.from + "' has no element [" +
                              std::to_string(*transition.match.target) + "]");
    }
    if (transition.match.role && source.tree.find(*transition.match.role, *transition.match.name) == nullptr) {
      throw DanglingReference(at + ": page '" + transition.from + "' has no " + *transition.match.role + " '" +
                              *transition.match.name + "'");
    }
    scenario.transitions.push_back(std::move(transition));
  }

  const nlohmann::json& tasks = field(j, "tasks", "");
  if (!tasks.is_array()) throw SchemaError("/tasks", "expected an array");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string at = "/tasks/" + std::to_string(i);
    const nlohmann::json& t = tasks[i];
    reject_unknown(t, {"id", "goal", "domain", "start", "success", "gold"}, at);
    ScenarioTask task;
    task.instruction.id = string_field(t, "id", at);
    task.instruction.goal_text = string_field(t, "goal", at);
    task.instruction.domain_tag = t.contains("domain") ? string_field(t, "domain", at) : scenario.name;
    task.start = string_field(t, "start", at);
    task.goal = parse_goal(field(t, "success", at), at + "/success");
    if (scenario.pages.count(task.start) == 0) throw DanglingReference(at + ": unknown start page '" + task.start + "'");
    if (task.goal.kind == GoalSpec::Kind::reach_page && scenario.pages.count(task.goal.value) == 0) {
      throw DanglingReference(at + ": unknown goal page '" + task.goal.value + "'");
    }
    if (t.contains("gold")) {
      const nlohmann::json& gold = t["gold"];
      if (!gold.is_array()) throw SchemaError(at + "/gold", "expected an array");
      for (std::size_t g = 0; g < gold.size(); ++g) {
        if (!gold[g].is_string()) throw SchemaError(at + "/gold/" + std::to_string(g), "expected a string");
        try {
          task.gold.push_back(render_action(parse_action(gold[g].get<std::string>())));
        } catch (const UnparseableAction& e) {
          throw SchemaError(at + "/gold/" + std::to_string(g), e.what());
        }
      }
    }
    for (const ScenarioTask& existing : scenario.tasks) {
      if (existing.instruction.id == task.instruction.id) throw SchemaError(at + "/id", "duplicate task id");
    }
    scenario.tasks.push_back(std::move(task));
  }
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open scenario '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  return scenario_from_json(j);
}

bool check_goal(const GoalSpec& goal, const std::string& final_page, const std::optional<std::string>& answer) {
  switch (goal.kind) {
    case GoalSpec::Kind::reach_page:
      return final_page == goal.value;
    case GoalSpec::Kind::answer_exact:
      return answer.has_value() && trimmed(*answer) == trimmed(goal.value);
    case GoalSpec::Kind::answer_contains:
      return answer.has_value() && answer->find(goal.value) != std::string::npos;
  }
  return false;
}

SandboxEnv::SandboxEnv(std::shared_ptr<const Scenario> scenario, const std::string& task_id)
    : scenario_(std::move(scenario)), task_id_(task_id) {
  if (!scenario_) throw InvalidArgument("sandbox needs a scenario");
  reset();
}

void SandboxEnv::reset() {
  task_ = &scenario_->task(task_id_);
  page_ = task_->start;
  back_stack_.clear();
  terminated_ = false;
  answer_.reset();
  executions_ = 0;
  generation_ = ++g_generation;
}

void SandboxEnv::reload(std::shared_ptr<const Scenario> scenario) {
  if (!scenario) throw InvalidArgument("sandbox needs a scenario");
  scenario_ = std::move(scenario);
  reset();
}

const AxTree& SandboxEnv::observation() const { return scenario_->page(page_).tree; }

const AxTree& SandboxEnv::step(const Action& action) {
  if (terminated_) throw EpisodeAlreadyTerminated("episode for task '" + task_id_ + "' has already terminated");
  ++executions_;
  if (action.kind == ActionKind::stop) {
    terminated_ = true;
    answer_ = action.text;
    return observation();
  }

  const Page& here = scenario_->page(page_);
  for (const Transition& t : scenario_->transitions) {
    if (t.from != page_ || !matches(t.match, action, here)) continue;
    if (t.to != page_) back_stack_.push_back(page_);
    page_ = t.to;
    if (t.answer) {
      terminated_ = true;
      answer_ = t.answer;
    }
    return observation();
  }

  if (action.kind == ActionKind::go_back && !back_stack_.empty()) {
    page_ = back_stack_.back();
    back_stack_.pop_back();
  } else if (action.kind == ActionKind::go_to) {
    if (const Page* target = scenario_->page_by_url(trimmed(*action.text)); target != nullptr && target->id != page_) {
      back_stack_.push_back(page_);
      page_ = target->id;
    }
  }
  return observation();
}

EnvSnapshot SandboxEnv::snapshot() const {
  EnvSnapshot snap;
  snap.generation = generation_;
  snap.state = {{"page", page_}, {"back", back_stack_}, {"terminated", terminated_}};
  snap.state["answer"] = answer_ ? nlohmann::json(*answer_) : nlohmann::json(nullptr);
  return snap;
}

void SandboxEnv::restore(const EnvSnapshot& snapshot) {
  if (snapshot.generation != generation_) throw StaleSnapshot("snapshot belongs to an earlier scenario load");
  page_ = snapshot.state.at("page").get<std::string>();
  back_stack_ = snapshot.state.at("back").get<std::vector<std::string>>();
  terminated_ = snapshot.state.at("terminated").get<bool>();
  const auto& answer = snapshot.state.at("answer");
  answer_ = answer.is_null() ? std::nullopt : std::optional<std::string>(answer.get<std::string>());
}

bool SandboxEnv::goal_met() const { return check_goal(task_->goal, page_, answer_); }

}  // namespace wma
