#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wma/action.hpp"
#include "wma/dataset.hpp"
#include "wma/gateway.hpp"
#include "wma/prompts.hpp"

namespace wma {

// --- step and task metrics ---------------------------------------------------

struct GoldStep {
  Action action;
  /// Acceptable target element ids. Empty means the action's own target.
  std::vector<std::int64_t> elements;
};

struct StepJudgment {
  bool element_correct = false;
  double action_f1 = 0.0;
  bool step_success = false;
  /// No prediction existed for this gold step.
  bool missing = false;
};

struct TaskPrediction {
  std::string task_id;
  std::vector<Action> predicted;
  std::vector<GoldStep> gold;
};

struct TaskJudgment {
  std::string task_id;
  std::vector<StepJudgment> steps;
  double element_accuracy = 0.0;
  double action_f1 = 0.0;
  double step_success_rate = 0.0;
  bool success = false;
  /// "missing_steps", "extra_steps".
  std::vector<std::string> flags;
};

struct MetricsReport {
  double element_accuracy = 0.0;
  double action_f1 = 0.0;
  double step_success_rate = 0.0;
  double success_rate = 0.0;
  std::vector<TaskJudgment> tasks;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Action text used for token F1: the canonical form without the
/// press-enter flag of type actions.
std::string metric_action_text(const Action& action);

/// F1 over whitespace-token multisets. Two empty strings score 1.
double token_f1(std::string_view predicted, std::string_view gold);

StepJudgment judge_step(const Action& predicted, const GoldStep& gold);

/// Steps are aligned by index. Missing predictions score 0 and are flagged;
/// extra predictions are ignored and flagged.
TaskJudgment judge_task(const TaskPrediction& prediction);

/// Per-task metrics, macro-averaged over tasks.
MetricsReport compute_metrics(const std::vector<TaskPrediction>& predictions);

// --- coverage ----------------------------------------------------------------

/// Splits on '.', '!', '?' and newlines; trims and drops empty pieces.
std::vector<std::string> split_sentences(std::string_view text);

struct CoverageResult {
  double score = 0.0;
  std::size_t covered = 0;
  std::size_t total = 0;
};

inline constexpr double kLexicalCoverageThreshold = 0.8;

/// Fraction of gold sentences covered by the prediction. Without a judge a
/// gold sentence counts as covered when its similarity ratio against some
/// predicted sentence is at least kLexicalCoverageThreshold. Throws
/// InvalidArgument when the gold text has no sentences.
CoverageResult coverage_score(std::string_view predicted, std::string_view gold, const ModelClient* judge = nullptr,
                              const PromptLibrary& prompts = PromptLibrary::embedded());

// --- next-state multiple choice ----------------------------------------------

struct McqItem {
  std::string objective;
  std::string observation;
  std::string action;
  std::array<std::string, 2> choices;
  std::size_t gold_index = 0;
  double negative_similarity = 0.0;
};

nlohmann::json to_json(const McqItem& item);

/// One item per step of a single trajectory. The wrong choice is the other
/// state of the trajectory most similar to the true next state. Answer
/// positions are shuffled with the seeded generator. Throws
/// InsufficientStates when the trajectory has fewer than two distinct
/// observations.
std::vector<McqItem> build_next_state_mcq(const std::vector<TransitionTuple>& trajectory, std::uint64_t seed);

/// Reads "Answer: X" first, otherwise the first standalone A or B.
std::optional<std::size_t> parse_choice_letter(std::string_view reply);

/// Reads the first integer in 1..count and returns it 0-based.
std::optional<std::size_t> parse_choice_number(std::string_view reply, std::size_t count);

struct ItemOutcome {
  std::optional<std::size_t> answer;
  bool correct = false;
  std::string reply;
};

struct HarnessReport {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t unparseable = 0;
  std::vector<ItemOutcome> items;

  nlohmann::json to_json() const;
};

HarnessReport run_mcq_eval(const std::vector<McqItem>& items, const ModelClient& model,
                           const PromptLibrary& prompts = PromptLibrary::embedded());

/// Prompt the MCQ harness sends for `item`; oracle scripts key on it.
std::string mcq_user_prompt(const McqItem& item, const PromptLibrary& prompts = PromptLibrary::embedded());

// --- action selection --------------------------------------------------------

struct SelectionItem {
  std::string objective;
  std::string observation;
  std::vector<std::string> choices;
  /// Resulting state per choice; used when evaluating with next states.
  std::vector<std::string> next_states;
  std::size_t gold_index = 0;
};

nlohmann::json to_json(const SelectionItem& item);

/// Places the gold action among the negatives at a seeded position.
SelectionItem make_selection_item(std::string objective, std::string observation, std::string gold,
                                  std::vector<std::string> negatives, std::uint64_t seed,
                                  std::vector<std::string> next_states = {});

/// Asks the model for `count` wrong but plausible actions. Lines that fail
/// to parse or repeat the gold action are dropped.
std::vector<std::string> generate_negative_actions(const ModelClient& model, const std::string& objective,
                                                   const std::string& observation, const std::string& gold,
                                                   std::size_t count,
                                                   const PromptLibrary& prompts = PromptLibrary::embedded());

HarnessReport run_action_selection_eval(const std::vector<SelectionItem>& items, const ModelClient& model,
                                        bool with_next_state,
                                        const PromptLibrary& prompts = PromptLibrary::embedded());

std::string selection_user_prompt(const SelectionItem& item, bool with_next_state,
                                  const PromptLibrary& prompts = PromptLibrary::embedded());

}  // namespace wma
