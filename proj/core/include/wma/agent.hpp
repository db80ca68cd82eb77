#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wma/abstraction.hpp"
#include "wma/action.hpp"
#include "wma/diff.hpp"
#include "wma/environment.hpp"
#include "wma/error.hpp"
#include "wma/gateway.hpp"
#include "wma/instruction.hpp"
#include "wma/prompts.hpp"

namespace wma {

/// Model clients used by the agent, one per role.
struct Backends {
  ModelClient policy;
  ModelClient world;
  ModelClient value;
  ModelClient abstraction;
  const PromptLibrary* prompts = &PromptLibrary::embedded();
};

enum class ScoreMode {
  /// Score (instruction, observation, action, simulated next state).
  with_next_state,
  /// Score (instruction, observation, action) with no simulation.
  q_value,
};

enum class AgentMode {
  /// Execute the most frequent sampled action.
  baseline,
  /// Simulate and score the top-k candidates, execute the best.
  wma,
  /// Draft one action, simulate it, and let the policy revise it once.
  self_refine,
};

std::string_view to_string(AgentMode mode) noexcept;
std::optional<AgentMode> agent_mode_from_string(std::string_view name) noexcept;

struct AgentConfig {
  std::size_t k = 3;
  int n_samples = 20;
  double top_p = 1.0;
  int max_steps = 5;
  std::uint64_t seed = 0;
  ScoreMode score_mode = ScoreMode::with_next_state;
  /// Number of past (action, result) pairs shown to the policy.
  std::size_t history_window = 5;
  /// Show raw next observations in the history instead of abstracted ones.
  bool raw_history = false;
  AbstractionOptions abstraction;
  MatchWeights match;

  /// Throws InvalidArgument for out-of-range values.
  void validate() const;
};

/// One executed step as the policy sees it in later prompts.
struct HistoryEntry {
  std::string action;
  std::string result;
};

/// Numbered "action / result" lines for the last `window` entries, or
/// "None" when there is no history.
std::string render_history(const std::vector<HistoryEntry>& history, std::size_t window);

struct SampleResult {
  std::vector<Action> actions;
  /// Samples that did not parse, over all attempts.
  std::size_t dropped = 0;
  /// A second request with the format reminder was needed.
  bool retried = false;
  /// Nothing parsed even after the retry; `actions` holds one none action.
  bool fell_back = false;
  std::int64_t latency_ms = 0;
};

/// Samples `n_samples` completions from the policy and parses each. When no
/// sample parses, retries once with the format reminder appended, then
/// falls back to a single none action.
SampleResult sample_actions(const Backends& backends, const AxTree& observation, const Instruction& instruction,
                            const std::string& history, int n_samples, double top_p,
                            std::optional<std::uint64_t> seed = std::nullopt);

struct Candidate {
  Action action;
  std::size_t frequency = 0;
  std::size_t rank_index = 0;
  std::optional<AbstractedObservation> simulated;
  std::optional<double> reward;
  std::vector<std::string> flags;
};

/// Groups actions by canonical form and keeps the `k` most frequent. Ties
/// keep first-sample order. Throws EmptyActionList.
std::vector<Candidate> rank_candidates(const std::vector<Action>& actions, std::size_t k);

struct Simulation {
  AbstractedObservation next;
  std::int64_t latency_ms = 0;
};

/// Predicts the next observation with the world model. Never touches the
/// environment. Throws BackendError subclasses, and EmptyResponse for a
/// blank prediction.
Simulation simulate(const Backends& backends, const AxTree& observation, const Action& action,
                    const Instruction& instruction);

struct Score {
  double value = 0.0;
  /// "clipped", "no_score".
  std::vector<std::string> flags;
  std::int64_t latency_ms = 0;
};

/// First number in the reply, or nullopt.
std::optional<double> parse_score(std::string_view reply);

/// Asks the value model for a reward in [0, 1]. Out-of-range numbers are
/// clipped and flagged; a reply without a number is retried once and then
/// scored 0.0 with a flag.
Score score(const Backends& backends, const Instruction& instruction, const AxTree& observation,
            const Action& action, const std::optional<std::string>& next_state, ScoreMode mode);

/// Index of the best candidate: highest reward, then higher frequency, then
/// lower rank_index. Unscored candidates count as reward 0. Throws
/// EmptyCandidates.
std::size_t select_index(const std::vector<Candidate>& candidates);
Action select_action(const std::vector<Candidate>& candidates);

struct StepTimings {
  std::int64_t policy_ms = 0;
  std::int64_t world_ms = 0;
  std::int64_t value_ms = 0;

  std::int64_t total() const noexcept { return policy_ms + world_ms + value_ms; }
};

struct StepRecord {
  std::size_t t = 0;
  std::string observation_digest;
  std::string url;
  std::vector<Candidate> candidates;
  Action chosen;
  std::string next_observation_digest;
  std::size_t env_executions = 0;
  std::size_t simulate_calls = 0;
  std::size_t value_calls = 0;
  std::size_t dropped_samples = 0;
  StepTimings timings;
  std::vector<std::string> flags;
  /// Search only: the action path executed in this step.
  std::vector<std::string> executed;
};

struct Trajectory {
  Instruction instruction;
  std::vector<StepRecord> steps;
  /// "stop", "max_steps" or "error".
  std::string outcome;
  bool success = false;
  std::optional<std::string> answer;
  std::string final_url;
  std::optional<std::string> error;
  /// Calls made during the episode.
  CallLedger ledger;
};

nlohmann::json to_json(const StepRecord& record);
nlohmann::json trajectory_footer(const Trajectory& trajectory);
/// One JSON line per step, then a footer line.
std::string trajectory_jsonl(const Trajectory& trajectory);

/// Thrown when the environment fails mid-episode; carries what was done.
class EpisodeFailed : public Error {
 public:
  EpisodeFailed(const std::string& what, Trajectory partial) : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// Goal test used to fill Trajectory::success once the episode ends.
using GoalCheck = std::function<bool(const Environment&)>;

/// Runs one episode: sample, rank, simulate and score each candidate,
/// select, execute. Exactly one environment step per loop iteration. A
/// single remaining candidate is executed without simulation.
Trajectory run_episode(Environment& env, const Backends& backends, const Instruction& instruction,
                       const AgentConfig& config, AgentMode mode = AgentMode::wma, const GoalCheck& goal = {});

struct RefineResult {
  Action draft;
  std::optional<AbstractedObservation> simulated;
  Action final_action;
  std::vector<std::string> flags;
  StepTimings timings;
};

/// One refinement round: draft with one policy sample, simulate it, then ask
/// the policy to revise. An unparseable revision keeps the draft.
RefineResult self_refine(const Backends& backends, const AxTree& observation, const Instruction& instruction,
                         const std::string& history, const AgentConfig& config,
                         std::optional<std::uint64_t> seed = std::nullopt);

struct SearchOptions {
  std::size_t width = 2;
  std::size_t depth = 1;
  /// Environment steps allowed per search call, replay included. Zero means
  /// enough for a full expansion of the width/depth tree.
  std::size_t budget = 0;
};

struct SearchNode {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  std::size_t depth = 0;
  Action action;
  std::size_t frequency = 0;
  double score = 0.0;
  std::string simulated;
  bool expanded = false;
  bool terminal = false;
};

struct SearchResult {
  std::vector<Action> executed;
  /// History entries for the executed actions.
  std::vector<HistoryEntry> history;
  std::vector<SearchNode> nodes;
  std::size_t env_steps = 0;
  /// The environment could not snapshot, so depth was reduced to 1.
  bool degraded = false;
  StepTimings timings;
};

/// Best-first search: width comes from simulated candidates, depth from real
/// environment steps on the most promising node, restored via snapshots.
/// Executes the best-scoring path from the starting state and returns it.
SearchResult search_multistep(Environment& env, const Backends& backends, const Instruction& instruction,
                              const std::vector<HistoryEntry>& history, const AgentConfig& config,
                              const SearchOptions& options);

/// Repeats search_multistep until the episode stops or max_steps actions
/// have been executed.
Trajectory run_search_episode(Environment& env, const Backends& backends, const Instruction& instruction,
                              const AgentConfig& config, const SearchOptions& options, const GoalCheck& goal = {});

}  // namespace wma
