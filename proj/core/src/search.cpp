#include <algorithm>

#include "agent_internal.hpp"
#include "wma/digest.hpp"

namespace wma {

namespace {

// Environment state and history reached by executing a node's path.
struct NodeState {
  EnvSnapshot snapshot;
  AxTree observation;
  std::vector<HistoryEntry> history;
};

std::size_t full_budget(std::size_t width, std::size_t depth) {
  // One step per expandable node plus the final replay.
  std::size_t expandable = 0;
  std::size_t level = 1;
  for (std::size_t d = 1; d < depth; ++d) {
    level *= width;
    expandable += level;
  }
  return expandable + depth;
}

}  // namespace

SearchResult search_multistep(Environment& env, const Backends& backends, const Instruction& instruction,
                              const std::vector<HistoryEntry>& history, const AgentConfig& config,
                              const SearchOptions& options) {
  config.validate();
  if (options.width < 1 || options.depth < 1) throw InvalidArgument("search width and depth must be >= 1");
  SearchResult result;
  std::size_t depth = options.depth;

  std::optional<EnvSnapshot> root;
  try {
    root = env.snapshot();
  } catch (const SnapshotUnsupported&) {
    result.degraded = true;
    depth = 1;
  }
  const std::size_t budget = options.budget > 0 ? options.budget : full_budget(options.width, depth);

  std::vector<SearchNode>& nodes = result.nodes;
  std::vector<std::optional<NodeState>> states;

  auto expand = [&](std::optional<std::size_t> parent, const AxTree& observation,
                    const std::vector<HistoryEntry>& hist) {
    const std::size_t child_depth = parent ? nodes[*parent].depth + 1 : 1;
    const std::uint64_t seed = config.seed + nodes.size() + 1;
    const SampleResult sample = sample_actions(backends, observation, instruction,
                                               render_history(hist, config.history_window), config.n_samples,
                                               config.top_p, seed);
    result.timings.policy_ms += sample.latency_ms;
    for (const Candidate& c : rank_candidates(sample.actions, options.width)) {
      SearchNode node;
      node.id = nodes.size();
      node.parent = parent;
      node.depth = child_depth;
      node.action = c.action;
      node.frequency = c.frequency;
      node.terminal = c.action.kind == ActionKind::stop;
      std::optional<std::string> next;
      bool failed = false;
      if (config.score_mode == ScoreMode::with_next_state) {
        try {
          const Simulation sim = simulate(backends, observation, c.action, instruction);
          result.timings.world_ms += sim.latency_ms;
          node.simulated = sim.next.text;
          next = sim.next.text;
        } catch (const BackendUnavailable&) {
          failed = true;
        } catch (const EmptyResponse&) {
          failed = true;
        }
      }
      if (!failed) {
        const Score s = score(backends, instruction, observation, c.action, next, config.score_mode);
        result.timings.value_ms += s.latency_ms;
        node.score = s.value;
      }
      nodes.push_back(std::move(node));
      states.emplace_back();
    }
  };

  const AxTree root_observation = env.observation();
  expand(std::nullopt, root_observation, history);

  while (root) {
    // Highest-scoring unexpanded node that may still grow; earliest on ties.
    std::optional<std::size_t> pick;
    for (const SearchNode& n : nodes) {
      if (n.expanded || n.terminal || n.depth >= depth) continue;
      if (!pick || n.score > nodes[*pick].score) pick = n.id;
    }
    if (!pick || result.env_steps + 1 + depth > budget) break;

    SearchNode& node = nodes[*pick];
    node.expanded = true;
    const NodeState* parent_state = node.parent ? &*states[*node.parent] : nullptr;
    env.restore(parent_state ? parent_state->snapshot : *root);
    const AxTree before = parent_state ? parent_state->observation : root_observation;
    env.step(node.action);
    ++result.env_steps;
    if (env.terminated()) {
      node.terminal = true;
      continue;
    }
    NodeState state;
    state.snapshot = env.snapshot();
    state.observation = env.observation();
    state.history = parent_state ? parent_state->history : history;
    state.history.push_back({render_action(node.action),
                             detail::transition_note(backends, instruction, before, state.observation, node.action,
                                                     config)});
    states[*pick] = std::move(state);
    expand(*pick, states[*pick]->observation, states[*pick]->history);
  }

  // Best node: highest score, then deeper, then created first.
  std::size_t best = 0;
  for (const SearchNode& n : nodes) {
    const SearchNode& b = nodes[best];
    if (n.score > b.score || (n.score == b.score && n.depth > b.depth)) best = n.id;
  }
  std::vector<Action> path;
  for (std::optional<std::size_t> at = best; at; at = nodes[*at].parent) path.push_back(nodes[*at].action);
  std::reverse(path.begin(), path.end());

  if (root) env.restore(*root);
  for (const Action& a : path) {
    if (env.terminated()) break;
    const AxTree before = env.observation();
    env.step(a);
    ++result.env_steps;
    result.executed.push_back(a);
    result.history.push_back(
        {render_action(a), detail::transition_note(backends, instruction, before, env.observation(), a, config)});
  }
  return result;
}

Trajectory run_search_episode(Environment& env, const Backends& backends, const Instruction& instruction,
                              const AgentConfig& config, const SearchOptions& options, const GoalCheck& goal) {
  config.validate();
  const detail::LedgerMark mark(backends);
  Trajectory trajectory;
  trajectory.instruction = instruction;
  std::vector<HistoryEntry> history;
  std::size_t executed = 0;

  while (executed < static_cast<std::size_t>(config.max_steps) && !env.terminated()) {
    const AxTree before = env.observation();
    StepRecord record;
    record.t = trajectory.steps.size() + 1;
    record.observation_digest = observation_digest(before.source_text);
    record.url = before.url;

    SearchOptions step_options = options;
    const std::size_t remaining = static_cast<std::size_t>(config.max_steps) - executed;
    step_options.depth = std::min(options.depth, remaining);
    SearchResult found;
    try {
      found = search_multistep(env, backends, instruction, history, config, step_options);
    } catch (const Error& e) {
      trajectory.outcome = "error";
      trajectory.error = e.what();
      trajectory.ledger = mark.since();
      throw EpisodeFailed(e.what(), std::move(trajectory));
    }

    for (const SearchNode& n : found.nodes) {
      if (n.depth != 1) continue;
      Candidate c;
      c.action = n.action;
      c.frequency = n.frequency;
      c.rank_index = n.id;
      if (!n.simulated.empty()) {
        AbstractedObservation sim;
        sim.text = n.simulated;
        sim.mode = AbstractionMode::model;
        sim.source_delta_digest = short_digest(n.simulated);
        c.simulated = sim;
      }
      c.reward = n.score;
      record.candidates.push_back(std::move(c));
    }
    record.chosen = found.executed.empty() ? Action::none() : found.executed.front();
    record.env_executions = found.env_steps;
    record.simulate_calls = found.nodes.size();
    record.value_calls = found.nodes.size();
    record.timings = found.timings;
    if (found.degraded) record.flags.emplace_back("snapshot_unsupported");

    history.insert(history.end(), found.history.begin(), found.history.end());
    for (const Action& a : found.executed) record.executed.push_back(render_action(a));
    record.next_observation_digest = observation_digest(env.observation().source_text);
    executed += std::max<std::size_t>(found.executed.size(), 1);
    trajectory.steps.push_back(std::move(record));
  }

  trajectory.outcome = env.terminated() ? "stop" : "max_steps";
  trajectory.answer = env.answer();
  trajectory.final_url = env.observation().url;
  trajectory.success = goal ? goal(env) : false;
  trajectory.ledger = mark.since();
  return trajectory;
}

}  // namespace wma
