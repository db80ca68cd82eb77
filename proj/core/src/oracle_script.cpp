#include "wma/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <set>

#include "wma/abstraction.hpp"
#include "wma/error.hpp"
#include "wma/prompts.hpp"

namespace wma {

namespace {

std::string policy_reply(const std::string& action) {
  return "Let's think step-by-step. In summary, the next action I will perform is ```" + action + "```";
}

std::string score_text(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "Score: %.1f", value);
  return buf;
}

MockRule all_of(std::vector<std::string> patterns, std::vector<std::string> responses) {
  MockRule rule;
  rule.match = MockRule::Match::all_of;
  rule.patterns = std::move(patterns);
  rule.responses = std::move(responses);
  return rule;
}

MockRule contains(std::string pattern, std::vector<std::string> responses) {
  MockRule rule;
  rule.match = MockRule::Match::contains;
  rule.patterns = {std::move(pattern)};
  rule.responses = std::move(responses);
  return rule;
}

// First element of the page other than `avoid`, for hover distractors.
std::int64_t distractor_target(const AxTree& tree, std::optional<std::int64_t> avoid) {
  for (const AxElement& e : tree.elements) {
    if (!avoid || e.elem_id != *avoid) return e.elem_id;
  }
  throw InvalidArgument("page '" + tree.url + "' has no element to use as a distractor");
}

}  // namespace

MockScript build_oracle_script(const Scenario& scenario, const OracleOptions& options, const MatchWeights& weights) {
  auto shared = std::make_shared<const Scenario>(scenario);
  MockScript script;
  script.default_response = policy_reply("stop [N/A]");
  std::vector<MockRule> policy_rules;
  std::vector<MockRule> world_rules;
  std::vector<MockRule> value_rules;
  std::set<std::string> world_keys;
  const std::string policy_tag = prompt_tag("policy_cot");
  const std::string world_tag = prompt_tag("world_model");

  for (const ScenarioTask& task : scenario.tasks) {
    SandboxEnv env(shared, task.instruction.id);
    std::set<std::string> visited;
    const std::string objective = "OBJECTIVE: " + task.instruction.goal_text + "\n";
    for (const std::string& gold_text : task.gold) {
      if (env.terminated()) throw InvalidArgument("gold path of task '" + task.instruction.id + "' continues after stop");
      const std::string page = env.current_page();
      if (!visited.insert(page).second) {
        throw InvalidArgument("gold path of task '" + task.instruction.id + "' revisits page '" + page + "'");
      }
      const AxTree before = env.observation();
      const std::string url = "URL: " + before.url + "\n";
      const Action gold = parse_action(gold_text);
      const std::string scroll = "scroll [down]";
      const std::string hover = render_action(Action::hover(distractor_target(before, gold.target)));

      std::vector<std::string> replies;
      for (std::size_t i = 0; i < options.scroll_replies; ++i) replies.push_back(policy_reply(scroll));
      for (std::size_t i = 0; i < options.gold_replies; ++i) replies.push_back(policy_reply(gold_text));
      for (std::size_t i = 0; i < options.hover_replies; ++i) replies.push_back(policy_reply(hover));
      policy_rules.push_back(all_of({policy_tag, url, objective}, std::move(replies)));

      // True outcome of each candidate, computed on a throwaway branch.
      for (const std::string& candidate : {scroll, gold_text, hover}) {
        if (!world_keys.insert(before.url + "\n" + candidate).second) continue;
        const EnvSnapshot snap = env.snapshot();
        env.step(parse_action(candidate));
        const std::string outcome = render_delta_text(compute_delta(before, env.observation(), weights));
        env.restore(snap);
        world_rules.push_back(all_of({world_tag, url, "ACTION: " + candidate + "\n"}, {outcome}));
      }

      if (!options.constant_value) {
        for (const char* name : {"value", "value_q"}) {
          value_rules.push_back(
              all_of({prompt_tag(name), url, objective, "ACTION: " + gold_text + "\n"}, {score_text(1.0)}));
        }
      }
      env.step(gold);
    }
  }

  const double fallback = options.constant_value ? options.constant_score : 0.0;
  for (const char* name : {"value", "value_q"}) {
    value_rules.push_back(contains(prompt_tag(name), {score_text(fallback)}));
  }
  for (auto* group : {&policy_rules, &world_rules, &value_rules}) {
    script.rules.insert(script.rules.end(), group->begin(), group->end());
  }
  return script;
}

MockScript build_mcq_oracle_script(const std::vector<McqItem>& items) {
  MockScript script;
  for (const McqItem& item : items) {
    MockRule rule;
    rule.match = MockRule::Match::exact;
    rule.patterns = {mcq_user_prompt(item)};
    rule.responses = {item.gold_index == 0 ? "Answer: A" : "Answer: B"};
    script.rules.push_back(std::move(rule));
  }
  return script;
}

MockScript build_selection_oracle_script(const std::vector<SelectionItem>& items, bool with_next_state) {
  MockScript script;
  for (const SelectionItem& item : items) {
    MockRule rule;
    rule.match = MockRule::Match::exact;
    rule.patterns = {selection_user_prompt(item, with_next_state)};
    rule.responses = {"Answer: " + std::to_string(item.gold_index + 1)};
    script.rules.push_back(std::move(rule));
  }
  return script;
}

MockScript build_coin_flip_script(std::uint64_t seed) {
  MockScript script;
  script.seed = seed;
  MockRule rule = contains(prompt_tag("next_state_mcq"), {"Answer: A", "Answer: B"});
  rule.random = true;
  script.rules.push_back(std::move(rule));
  return script;
}

MockScript build_uniform_selection_script(std::size_t choices, std::uint64_t seed) {
  MockScript script;
  script.seed = seed;
  std::vector<std::string> replies;
  for (std::size_t i = 1; i <= choices; ++i) replies.push_back("Answer: " + std::to_string(i));
  for (const char* name : {"action_selection", "action_selection_next_state"}) {
    MockRule rule = contains(prompt_tag(name), replies);
    rule.random = true;
    script.rules.push_back(std::move(rule));
  }
  return script;
}

}  // namespace wma
