#include "harness.hpp"

#include <algorithm>

#include "test_helpers.hpp"

namespace wma::testing {

Backends single_backend(std::shared_ptr<ChatBackend> backend) {
  auto ledger = std::make_shared<CallLedger>();
  Backends b;
  b.policy = ModelClient(backend, ModelRole::policy, ledger);
  b.world = ModelClient(backend, ModelRole::world, ledger);
  b.value = ModelClient(backend, ModelRole::value, ledger);
  b.abstraction = ModelClient(backend, ModelRole::abstraction, ledger);
  return b;
}

std::shared_ptr<const Scenario> load_bundled(const std::string& file_name) {
  return std::make_shared<const Scenario>(load_scenario(scenario_file(file_name)));
}

std::shared_ptr<MockBackend> oracle_backend(const Scenario& scenario, bool constant_value) {
  OracleOptions options;
  options.constant_value = constant_value;
  return std::make_shared<MockBackend>(build_oracle_script(scenario, options));
}

namespace {

GoalCheck sandbox_goal() {
  return [](const Environment& env) { return static_cast<const SandboxEnv&>(env).goal_met(); };
}

}  // namespace

Trajectory run_task(const std::shared_ptr<const Scenario>& scenario, const std::string& task_id,
                    const Backends& backends, const AgentConfig& config, AgentMode mode) {
  SandboxEnv env(scenario, task_id);
  return run_episode(env, backends, env.task().instruction, config, mode, sandbox_goal());
}

Trajectory run_search_task(const std::shared_ptr<const Scenario>& scenario, const std::string& task_id,
                           const Backends& backends, const AgentConfig& config, const SearchOptions& options) {
  SandboxEnv env(scenario, task_id);
  return run_search_episode(env, backends, env.task().instruction, config, options, sandbox_goal());
}

AgentConfig scripted_config(std::size_t k) {
  AgentConfig config;
  config.k = k;
  config.n_samples = 20;
  config.max_steps = 5;
  config.seed = 7;
  return config;
}

std::shared_ptr<MockBackend> harvest_policy() {
  auto rule = [](const std::string& objective, const std::string& url, const std::string& action) {
    return nlohmann::json{{"match", "all_of"},
                          {"pattern", {"[task: policy_cot]", "OBJECTIVE: " + objective + "\n", "URL: " + url + "\n"}},
                          {"response", cot(action)}};
  };
  const std::string scroll_goal = "Open the shopping cart";
  const std::string add_goal = "Add the Blue Running Shoes to the cart";
  return mock({{"rules",
                {rule(scroll_goal, "http://shop.local/", "scroll [down]"),
                 rule(add_goal, "http://shop.local/", "click [7]"),
                 rule(add_goal, "http://shop.local/product/blue-running-shoes", "click [34]"),
                 rule(add_goal, "http://shop.local/cart", "stop")}}});
}

HarvestResult two_instruction_harvest(std::uint64_t seed) {
  const auto shop = load_bundled("shop-mini.json");
  const std::vector<Instruction> instructions = {shop->task("shop-01").instruction, shop->task("shop-05").instruction};
  HarvestConfig config;
  config.rollouts = 5;
  config.max_steps = 5;
  config.seed = seed;
  const EnvFactory factory = [shop](const Instruction& instruction) {
    return std::make_unique<SandboxEnv>(shop, instruction.id);
  };
  return collect_trajectories(factory, single_backend(harvest_policy()), instructions, config);
}

std::vector<std::vector<TransitionTuple>> gold_trajectories() {
  std::vector<std::vector<TransitionTuple>> out;
  for (const char* name : {"shop-mini.json", "forum-mini.json", "map-mini.json", "deceptive.json"}) {
    const auto scenario = load_bundled(name);
    for (const ScenarioTask& task : scenario->tasks) {
      SandboxEnv env(scenario, task.instruction.id);
      std::vector<TransitionTuple> steps;
      for (const std::string& text : task.gold) {
        TransitionTuple tuple;
        tuple.instruction = task.instruction;
        tuple.t = steps.size() + 1;
        tuple.observation = env.observation().source_text;
        tuple.url = env.observation().url;
        tuple.action = text;
        env.step(parse_action(text));
        tuple.next_observation = env.observation().source_text;
        tuple.next_url = env.observation().url;
        steps.push_back(std::move(tuple));
      }
      for (TransitionTuple& t : steps) t.n = steps.size();
      out.push_back(std::move(steps));
    }
  }
  return out;
}

std::vector<McqItem> gold_mcq_items(std::uint64_t seed) {
  std::vector<McqItem> items;
  std::uint64_t offset = 0;
  for (const auto& trajectory : gold_trajectories()) {
    for (McqItem& item : build_next_state_mcq(trajectory, seed + offset++)) items.push_back(std::move(item));
  }
  return items;
}

std::vector<SelectionItem> gold_selection_items(std::size_t count, std::size_t choices, std::uint64_t seed) {
  std::vector<TransitionTuple> steps;
  std::vector<std::string> pool;
  for (const auto& trajectory : gold_trajectories()) {
    for (const TransitionTuple& t : trajectory) {
      steps.push_back(t);
      if (std::find(pool.begin(), pool.end(), t.action) == pool.end()) pool.push_back(t.action);
    }
  }
  std::vector<SelectionItem> items;
  for (std::size_t i = 0; i < count; ++i) {
    const TransitionTuple& step = steps[i % steps.size()];
    std::vector<std::string> negatives;
    for (std::size_t j = 0; negatives.size() + 1 < choices && j < pool.size(); ++j) {
      const std::string& candidate = pool[(i + j) % pool.size()];
      if (candidate != step.action) negatives.push_back(candidate);
    }
    items.push_back(make_selection_item(step.instruction.goal_text, step.observation, step.action, negatives, seed + i));
  }
  return items;
}

}  // namespace wma::testing
