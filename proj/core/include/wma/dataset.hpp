#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wma/abstraction.hpp"
#include "wma/agent.hpp"
#include "wma/environment.hpp"
#include "wma/instruction.hpp"

namespace wma {

/// One harvested step: (I, o_t, a_t, o_{t+1}) plus its position in the
/// rollout. `t` is 1-based and `n` is the rollout length.
struct TransitionTuple {
  Instruction instruction;
  std::size_t rollout = 0;
  std::size_t t = 0;
  std::size_t n = 0;
  std::string observation;
  std::string url;
  std::string action;
  std::string next_observation;
  std::string next_url;
  /// The rollout ended by budget or by an environment fault, not by stop.
  bool truncated = false;

  bool operator==(const TransitionTuple&) const = default;
};

nlohmann::json to_json(const TransitionTuple& tuple);
TransitionTuple transition_tuple_from_json(const nlohmann::json& j);

struct HarvestConfig {
  std::size_t rollouts = 5;
  int max_steps = 5;
  double top_p = 1.0;
  std::uint64_t seed = 0;
};

/// Builds a fresh environment positioned at the instruction's start.
using EnvFactory = std::function<std::unique_ptr<Environment>(const Instruction&)>;

struct HarvestResult {
  std::vector<TransitionTuple> tuples;
  std::size_t trajectories = 0;
  /// "<instruction id>#<rollout>: <message>" for each environment fault.
  std::vector<std::string> faults;
};

/// Seed for one rollout, derived from the run seed, the instruction id and
/// the rollout index.
std::uint64_t rollout_seed(std::uint64_t seed, const std::string& instruction_id, std::size_t rollout);

/// Runs `rollouts` plain-policy rollouts per instruction (one sample per
/// step, no reranking) and records every step.
HarvestResult collect_trajectories(const EnvFactory& make_env, const Backends& backends,
                                   const std::vector<Instruction>& instructions, const HarvestConfig& config);

struct DedupResult {
  std::vector<TransitionTuple> tuples;
  std::size_t removed = 0;
};

/// Keeps the first tuple for each (observation digest, action) pair.
DedupResult dedupe_state_actions(const std::vector<TransitionTuple>& tuples);

/// Progress labels t/n for t = 1..n. Throws EmptyTrajectory for n = 0.
std::vector<double> label_rewards(std::size_t n);

struct WorldModelRecord {
  std::string instruction;
  std::string observation;
  std::string action;
  std::string target;

  bool operator==(const WorldModelRecord&) const = default;
};

struct ValueRecord {
  std::string instruction;
  std::string observation;
  std::string action;
  std::string next_observation;
  double reward = 0.0;

  bool operator==(const ValueRecord&) const = default;
};

nlohmann::json to_json(const WorldModelRecord& record);
WorldModelRecord world_model_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ValueRecord& record);
ValueRecord value_record_from_json(const nlohmann::json& j);

struct TrainingData {
  std::vector<WorldModelRecord> world_model;
  std::vector<ValueRecord> value;
  /// Tuples whose abstraction failed, with the reason.
  std::vector<std::string> skipped;
  std::string mode;
};

/// World-model targets are abstracted transitions; value records carry the
/// progress label of the tuple's step.
TrainingData build_training_data(const std::vector<TransitionTuple>& tuples, const ModelClient& abstraction,
                                 const AbstractionOptions& options, const MatchWeights& weights,
                                 const PromptLibrary& prompts = PromptLibrary::embedded());

struct ExportPaths {
  std::filesystem::path world_model;
  std::filesystem::path value;
  std::filesystem::path manifest;

  static ExportPaths in(const std::filesystem::path& directory);
};

/// Writes world_model.jsonl, value.jsonl and manifest.json atomically.
/// The manifest holds schema_version, counts, mode, config_digest and
/// tool_version.
void export_training_data(const TrainingData& data, const ExportPaths& paths, const std::string& config_digest);

std::vector<WorldModelRecord> read_world_model_jsonl(const std::filesystem::path& path);
std::vector<ValueRecord> read_value_jsonl(const std::filesystem::path& path);

struct SynthesisResult {
  std::vector<Instruction> instructions;
  /// Fewer unique instructions than requested came back.
  bool insufficient = false;
};

/// Asks the model for `count` new instructions in the style of the seeds.
/// Duplicates of the seeds or of each other are dropped.
SynthesisResult synthesize_instructions(const std::vector<Instruction>& seeds, const ModelClient& model,
                                        std::size_t count, const PromptLibrary& prompts = PromptLibrary::embedded());

/// Version string written into manifests and outputs.
std::string_view tool_version() noexcept;

}  // namespace wma
