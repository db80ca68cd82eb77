#include "wma/agent.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>

#include "agent_internal.hpp"
#include "wma/digest.hpp"

namespace wma {

std::string_view to_string(AgentMode mode) noexcept {
  switch (mode) {
    case AgentMode::baseline: return "baseline";
    case AgentMode::wma: return "wma";
    case AgentMode::self_refine: return "refine";
  }
  return "wma";
}

std::optional<AgentMode> agent_mode_from_string(std::string_view name) noexcept {
  for (AgentMode mode : {AgentMode::baseline, AgentMode::wma, AgentMode::self_refine}) {
    if (to_string(mode) == name) return mode;
  }
  return std::nullopt;
}

void AgentConfig::validate() const {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  if (!(top_p > 0 && top_p <= 1)) throw InvalidArgument("top_p must lie in (0, 1]");
  if (max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  match.validate();
}

namespace {

const std::string& observation_text(const AxTree& tree) { return tree.source_text; }

std::string single_line(std::string text) {
  std::string out;
  for (char c : text) {
    if (c == '\n') {
      out += " | ";
    } else if (c != '\r') {
      out += c;
    }
  }
  return out;
}

// Ledgers reachable from the backends, without duplicates.
std::vector<std::shared_ptr<CallLedger>> ledgers_of(const Backends& b) {
  std::vector<std::shared_ptr<CallLedger>> out;
  for (const ModelClient* c : {&b.policy, &b.world, &b.value, &b.abstraction}) {
    if (c->ledger() && std::find(out.begin(), out.end(), c->ledger()) == out.end()) out.push_back(c->ledger());
  }
  return out;
}

nlohmann::json optional_json(const std::optional<std::string>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

namespace detail {

LedgerMark::LedgerMark(const Backends& backends) : ledgers_(ledgers_of(backends)) {
  for (const auto& l : ledgers_) sizes_.push_back(l->records().size());
}

CallLedger LedgerMark::since() const {
  CallLedger out;
  for (std::size_t i = 0; i < ledgers_.size(); ++i) {
    const auto records = ledgers_[i]->records();
    for (std::size_t r = sizes_[i]; r < records.size(); ++r) out.record(records[r]);
  }
  return out;
}

}  // namespace detail

std::string render_history(const std::vector<HistoryEntry>& history, std::size_t window) {
  if (history.empty() || window == 0) return "None";
  const std::size_t first = history.size() > window ? history.size() - window : 0;
  std::string out;
  for (std::size_t i = first; i < history.size(); ++i) {
    if (!out.empty()) out += '\n';
    out += std::to_string(i + 1) + ". " + history[i].action + "\n   result: " + single_line(history[i].result);
  }
  return out;
}

SampleResult sample_actions(const Backends& backends, const AxTree& observation, const Instruction& instruction,
                            const std::string& history, int n_samples, double top_p,
                            std::optional<std::uint64_t> seed) {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  if (!(top_p > 0 && top_p <= 1)) throw InvalidArgument("top_p must lie in (0, 1]");
  const PromptSlots slots = {{"observation", observation_text(observation)},
                             {"url", observation.url},
                             {"objective", instruction.goal_text},
                             {"history", history}};
  std::vector<ChatMessage> messages = backends.prompts->render("policy_cot", slots);

  SampleResult result;
  for (int attempt = 0; attempt < 2 && result.actions.empty(); ++attempt) {
    if (attempt == 1) {
      result.retried = true;
      messages.back().content += "\n\n" + backends.prompts->get("format_reminder").user;
    }
    ChatRequest request = backends.policy.make_request(messages, n_samples);
    request.top_p = top_p;
    request.seed_hint = seed;
    const ChatResponse response = backends.policy.complete(request);
    result.latency_ms += response.latency_ms;
    for (const std::string& choice : response.choices) {
      try {
        result.actions.push_back(parse_action(choice));
      } catch (const UnparseableAction&) {
        ++result.dropped;
      }
    }
  }
  if (result.actions.empty()) {
    result.fell_back = true;
    result.actions.push_back(Action::none());
  }
  return result;
}

std::vector<Candidate> rank_candidates(const std::vector<Action>& actions, std::size_t k) {
  if (actions.empty()) throw EmptyActionList("no actions to rank");
  if (k < 1) throw InvalidArgument("k must be >= 1");
  std::vector<Candidate> groups;
  std::map<std::string, std::size_t> index;
  for (const Action& a : actions) {
    const std::string key = render_action(a);
    const auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) {
      Candidate c;
      c.action = a;
      groups.push_back(std::move(c));
    }
    ++groups[it->second].frequency;
  }
  // stable_sort keeps first-occurrence order among equal counts.
  std::stable_sort(groups.begin(), groups.end(),
                   [](const Candidate& x, const Candidate& y) { return x.frequency > y.frequency; });
  if (groups.size() > k) groups.resize(k);
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i].rank_index = i;
  return groups;
}

Simulation simulate(const Backends& backends, const AxTree& observation, const Action& action,
                    const Instruction& instruction) {
  const PromptSlots slots = {{"observation", observation_text(observation)},
                             {"url", observation.url},
                             {"objective", instruction.goal_text},
                             {"action", render_action(action)}};
  const ChatResponse response =
      backends.world.complete(backends.world.make_request(backends.prompts->render("world_model", slots)));
  if (response.choices.empty() || normalize_whitespace(response.choices.front()).empty()) {
    throw EmptyResponse("world model returned an empty prediction");
  }
  Simulation sim;
  sim.latency_ms = response.latency_ms;
  sim.next.text = response.choices.front();
  sim.next.mode = AbstractionMode::model;
  sim.next.source_delta_digest = short_digest(sim.next.text);
  return sim;
}

std::optional<double> parse_score(std::string_view reply) {
  for (std::size_t i = 0; i < reply.size(); ++i) {
    const bool digit = std::isdigit(static_cast<unsigned char>(reply[i])) != 0;
    const bool dot = reply[i] == '.' && i + 1 < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i + 1]));
    if (!digit && !dot) continue;
    std::size_t start = i;
    if (start > 0 && reply[start - 1] == '-') --start;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(reply.data() + start, reply.data() + reply.size(), value);
    if (ec == std::errc()) return value;
    if (dot) {
      // from_chars rejects a leading '.', so parse "0" + rest.
      std::string padded = "0" + std::string(reply.substr(i));
      const auto [p2, e2] = std::from_chars(padded.data(), padded.data() + padded.size(), value);
      if (e2 == std::errc()) return start < i ? -value : value;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

Score score(const Backends& backends, const Instruction& instruction, const AxTree& observation,
            const Action& action, const std::optional<std::string>& next_state, ScoreMode mode) {
  if (mode == ScoreMode::with_next_state && !next_state) {
    throw InvalidArgument("with_next_state scoring needs a simulated next state");
  }
  PromptSlots slots = {{"observation", observation_text(observation)},
                       {"url", observation.url},
                       {"objective", instruction.goal_text},
                       {"action", render_action(action)}};
  if (mode == ScoreMode::with_next_state) slots["next_state"] = *next_state;
  const std::vector<ChatMessage> messages =
      backends.prompts->render(mode == ScoreMode::with_next_state ? "value" : "value_q", slots);

  Score result;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const ChatResponse response = backends.value.complete(backends.value.make_request(messages));
    result.latency_ms += response.latency_ms;
    const auto parsed = response.choices.empty() ? std::nullopt : parse_score(response.choices.front());
    if (!parsed) continue;
    result.value = *parsed;
    if (result.value < 0.0 || result.value > 1.0) {
      result.value = std::clamp(result.value, 0.0, 1.0);
      result.flags.emplace_back("clipped");
    }
    return result;
  }
  result.value = 0.0;
  result.flags.emplace_back("no_score");
  return result;
}

std::size_t select_index(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw EmptyCandidates("no candidates to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const Candidate& a = candidates[i];
    const Candidate& b = candidates[best];
    const double ra = a.reward.value_or(0.0);
    const double rb = b.reward.value_or(0.0);
    if (ra != rb) {
      if (ra > rb) best = i;
    } else if (a.frequency != b.frequency) {
      if (a.frequency > b.frequency) best = i;
    } else if (a.rank_index < b.rank_index) {
      best = i;
    }
  }
  return best;
}

Action select_action(const std::vector<Candidate>& candidates) { return candidates[select_index(candidates)].action; }

RefineResult self_refine(const Backends& backends, const AxTree& observation, const Instruction& instruction,
                         const std::string& history, const AgentConfig& config, std::optional<std::uint64_t> seed) {
  RefineResult result;
  const SampleResult draft = sample_actions(backends, observation, instruction, history, 1, config.top_p, seed);
  result.timings.policy_ms += draft.latency_ms;
  result.draft = draft.actions.front();
  result.final_action = result.draft;
  if (draft.fell_back) result.flags.emplace_back("draft_unparseable");

  std::string predicted = "(no prediction available)";
  try {
    const Simulation sim = simulate(backends, observation, result.draft, instruction);
    result.timings.world_ms += sim.latency_ms;
    result.simulated = sim.next;
    predicted = sim.next.text;
  } catch (const BackendUnavailable&) {
    result.flags.emplace_back("simulate_failed");
  } catch (const EmptyResponse&) {
    result.flags.emplace_back("simulate_failed");
  }

  const PromptSlots slots = {{"observation", observation_text(observation)},
                             {"url", observation.url},
                             {"objective", instruction.goal_text},
                             {"history", history},
                             {"draft_action", render_action(result.draft)},
                             {"simulated_next_state", predicted}};
  ChatRequest request = backends.policy.make_request(backends.prompts->render("self_refine", slots));
  request.top_p = config.top_p;
  request.seed_hint = seed;
  const ChatResponse response = backends.policy.complete(request);
  result.timings.policy_ms += response.latency_ms;
  try {
    if (response.choices.empty()) throw UnparseableAction("empty refinement");
    result.final_action = parse_action(response.choices.front());
  } catch (const UnparseableAction&) {
    result.flags.emplace_back("refine_unparseable");
  }
  return result;
}

namespace detail {

std::string transition_note(const Backends& backends, const Instruction& instruction, const AxTree& before,
                            const AxTree& after, const Action& action, const AgentConfig& config) {
  if (config.raw_history) return observation_text(after);
  const TransitionDelta delta = compute_delta(before, after, config.match);
  std::vector<AxElement> tao;
  if (config.abstraction.use_model && !after.empty()) tao = tao_state(before, after, config.match);
  return describe_transition(instruction, before, action, delta, backends.abstraction, config.abstraction, &tao,
                             *backends.prompts)
      .text;
}

}  // namespace detail

namespace {

void simulate_and_score(const Backends& backends, const Instruction& instruction, const AxTree& observation,
                        const AgentConfig& config, std::vector<Candidate>& candidates, StepRecord& record) {
  for (Candidate& c : candidates) {
    std::optional<std::string> next;
    if (config.score_mode == ScoreMode::with_next_state) {
      ++record.simulate_calls;
      try {
        Simulation sim = simulate(backends, observation, c.action, instruction);
        record.timings.world_ms += sim.latency_ms;
        next = sim.next.text;
        c.simulated = std::move(sim.next);
      } catch (const BackendUnavailable&) {
        c.reward = 0.0;
        c.flags.emplace_back("simulate_failed");
        continue;
      } catch (const EmptyResponse&) {
        c.reward = 0.0;
        c.flags.emplace_back("simulate_failed");
        continue;
      }
    }
    ++record.value_calls;
    Score s = score(backends, instruction, observation, c.action, next, config.score_mode);
    record.timings.value_ms += s.latency_ms;
    c.reward = s.value;
    c.flags.insert(c.flags.end(), s.flags.begin(), s.flags.end());
  }
}

}  // namespace

Trajectory run_episode(Environment& env, const Backends& backends, const Instruction& instruction,
                       const AgentConfig& config, AgentMode mode, const GoalCheck& goal) {
  config.validate();
  const detail::LedgerMark mark(backends);
  Trajectory trajectory;
  trajectory.instruction = instruction;
  std::vector<HistoryEntry> history;

  for (int t = 1; t <= config.max_steps && !env.terminated(); ++t) {
    const AxTree before = env.observation();
    const std::string history_text = render_history(history, config.history_window);
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(t);

    StepRecord record;
    record.t = static_cast<std::size_t>(t);
    record.observation_digest = observation_digest(observation_text(before));
    record.url = before.url;

    if (mode == AgentMode::self_refine) {
      RefineResult refined = self_refine(backends, before, instruction, history_text, config, seed);
      record.timings = refined.timings;
      record.simulate_calls = 1;
      record.flags = refined.flags;
      Candidate draft;
      draft.action = refined.draft;
      draft.frequency = 1;
      draft.simulated = refined.simulated;
      record.candidates.push_back(draft);
      if (!(refined.final_action == refined.draft)) {
        Candidate revised;
        revised.action = refined.final_action;
        revised.frequency = 1;
        revised.rank_index = 1;
        record.candidates.push_back(revised);
      }
      record.chosen = refined.final_action;
    } else {
      const SampleResult sample =
          sample_actions(backends, before, instruction, history_text, config.n_samples, config.top_p, seed);
      record.timings.policy_ms = sample.latency_ms;
      record.dropped_samples = sample.dropped;
      if (sample.retried) record.flags.emplace_back("format_retry");
      if (sample.fell_back) record.flags.emplace_back("all_samples_unparseable");
      record.candidates = rank_candidates(sample.actions, mode == AgentMode::baseline ? 1 : config.k);
      if (record.candidates.size() > 1) {
        simulate_and_score(backends, instruction, before, config, record.candidates, record);
      }
      record.chosen = select_action(record.candidates);
    }

    try {
      env.step(record.chosen);
    } catch (const Error& e) {
      record.env_executions = 1;
      trajectory.steps.push_back(std::move(record));
      trajectory.outcome = "error";
      trajectory.error = e.what();
      trajectory.ledger = mark.since();
      throw EpisodeFailed(e.what(), std::move(trajectory));
    }
    record.env_executions = 1;
    const AxTree& after = env.observation();
    record.next_observation_digest = observation_digest(observation_text(after));
    history.push_back({render_action(record.chosen),
                       detail::transition_note(backends, instruction, before, after, record.chosen, config)});
    trajectory.steps.push_back(std::move(record));
  }

  trajectory.outcome = env.terminated() ? "stop" : "max_steps";
  trajectory.answer = env.answer();
  trajectory.final_url = env.observation().url;
  trajectory.success = goal ? goal(env) : false;
  trajectory.ledger = mark.since();
  return trajectory;
}

nlohmann::json to_json(const StepRecord& record) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const Candidate& c : record.candidates) {
    candidates.push_back({{"action", render_action(c.action)},
                          {"frequency", c.frequency},
                          {"rank", c.rank_index},
                          {"simulated", c.simulated ? nlohmann::json(c.simulated->text) : nlohmann::json(nullptr)},
                          {"reward", c.reward ? nlohmann::json(*c.reward) : nlohmann::json(nullptr)},
                          {"flags", c.flags}});
  }
  nlohmann::json j = {{"type", "step"},
                      {"t", record.t},
                      {"observation", record.observation_digest},
                      {"url", record.url},
                      {"candidates", candidates},
                      {"chosen", render_action(record.chosen)},
                      {"next_observation", record.next_observation_digest},
                      {"env_executions", record.env_executions},
                      {"simulate_calls", record.simulate_calls},
                      {"value_calls", record.value_calls},
                      {"dropped_samples", record.dropped_samples},
                      {"timings",
                       {{"policy_ms", record.timings.policy_ms},
                        {"world_ms", record.timings.world_ms},
                        {"value_ms", record.timings.value_ms}}},
                      {"flags", record.flags}};
  if (!record.executed.empty()) j["executed"] = record.executed;
  return j;
}

nlohmann::json trajectory_footer(const Trajectory& trajectory) {
  nlohmann::json j = {{"type", "footer"},
                      {"task_id", trajectory.instruction.id},
                      {"instruction", trajectory.instruction.goal_text},
                      {"outcome", trajectory.outcome},
                      {"success", trajectory.success},
                      {"answer", optional_json(trajectory.answer)},
                      {"final_url", trajectory.final_url},
                      {"steps", trajectory.steps.size()},
                      {"calls", trajectory.ledger.to_json().at("totals")}};
  if (trajectory.error) j["error"] = *trajectory.error;
  return j;
}

std::string trajectory_jsonl(const Trajectory& trajectory) {
  std::string out;
  for (const StepRecord& step : trajectory.steps) out += to_json(step).dump() + "\n";
  out += trajectory_footer(trajectory).dump() + "\n";
  return out;
}

}  // namespace wma
