#include "wma/dataset.hpp"

#include <cctype>
#include <set>

#include "wma/digest.hpp"
#include "wma/error.hpp"
#include "wma/io.hpp"

namespace wma {

std::string_view tool_version() noexcept { return WMA_VERSION; }

nlohmann::json to_json(const TransitionTuple& tuple) {
  return {{"instruction_id", tuple.instruction.id},
          {"instruction", tuple.instruction.goal_text},
          {"domain", tuple.instruction.domain_tag},
          {"rollout", tuple.rollout},
          {"t", tuple.t},
          {"n", tuple.n},
          {"observation", tuple.observation},
          {"url", tuple.url},
          {"action", tuple.action},
          {"next_observation", tuple.next_observation},
          {"next_url", tuple.next_url},
          {"truncated", tuple.truncated}};
}

TransitionTuple transition_tuple_from_json(const nlohmann::json& j) {
  TransitionTuple tuple;
  tuple.instruction = {j.at("instruction_id").get<std::string>(), j.at("instruction").get<std::string>(),
                       j.value("domain", std::string{})};
  tuple.rollout = j.at("rollout").get<std::size_t>();
  tuple.t = j.at("t").get<std::size_t>();
  tuple.n = j.at("n").get<std::size_t>();
  tuple.observation = j.at("observation").get<std::string>();
  tuple.url = j.value("url", std::string{});
  tuple.action = j.at("action").get<std::string>();
  tuple.next_observation = j.at("next_observation").get<std::string>();
  tuple.next_url = j.value("next_url", std::string{});
  tuple.truncated = j.value("truncated", false);
  return tuple;
}

std::uint64_t rollout_seed(std::uint64_t seed, const std::string& instruction_id, std::size_t rollout) {
  const std::string hex = sha256_hex(std::to_string(seed) + "\n" + instruction_id + "\n" + std::to_string(rollout));
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

HarvestResult collect_trajectories(const EnvFactory& make_env, const Backends& backends,
                                   const std::vector<Instruction>& instructions, const HarvestConfig& config) {
  if (config.rollouts < 1) throw InvalidArgument("rollouts must be >= 1");
  if (config.max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
  HarvestResult result;
  for (const Instruction& instruction : instructions) {
    for (std::size_t r = 0; r < config.rollouts; ++r) {
      const std::uint64_t seed = rollout_seed(config.seed, instruction.id, r);
      std::unique_ptr<Environment> env = make_env(instruction);
      std::vector<TransitionTuple> steps;
      std::vector<HistoryEntry> history;
      bool faulted = false;
      for (int t = 1; t <= config.max_steps && !env->terminated(); ++t) {
        const AxTree before = env->observation();
        const SampleResult sample = sample_actions(backends, before, instruction, render_history(history, 5), 1,
                                                   config.top_p, seed + static_cast<std::uint64_t>(t));
        const Action& action = sample.actions.front();
        try {
          env->step(action);
        } catch (const Error& e) {
          result.faults.push_back(instruction.id + "#" + std::to_string(r) + ": " + e.what());
          faulted = true;
          break;
        }
        const AxTree& after = env->observation();
        TransitionTuple tuple;
        tuple.instruction = instruction;
        tuple.rollout = r;
        tuple.t = static_cast<std::size_t>(t);
        tuple.observation = before.source_text;
        tuple.url = before.url;
        tuple.action = render_action(action);
        tuple.next_observation = after.source_text;
        tuple.next_url = after.url;
        steps.push_back(std::move(tuple));
        history.push_back({render_action(action), render_delta_text(compute_delta(before, after, MatchWeights{}))});
      }
      const bool truncated = faulted || !env->terminated();
      for (TransitionTuple& tuple : steps) {
        tuple.n = steps.size();
        tuple.truncated = truncated;
        result.tuples.push_back(std::move(tuple));
      }
      ++result.trajectories;
    }
  }
  return result;
}

DedupResult dedupe_state_actions(const std::vector<TransitionTuple>& tuples) {
  DedupResult result;
  std::set<std::pair<std::string, std::string>> seen;
  for (const TransitionTuple& tuple : tuples) {
    if (seen.emplace(observation_digest(tuple.observation), tuple.action).second) {
      result.tuples.push_back(tuple);
    } else {
      ++result.removed;
    }
  }
  return result;
}

std::vector<double> label_rewards(std::size_t n) {
  if (n == 0) throw EmptyTrajectory("cannot label an empty trajectory");
  std::vector<double> labels(n);
  for (std::size_t t = 1; t <= n; ++t) labels[t - 1] = static_cast<double>(t) / static_cast<double>(n);
  return labels;
}

nlohmann::json to_json(const WorldModelRecord& r) {
  return {{"instruction", r.instruction}, {"observation", r.observation}, {"action", r.action}, {"target", r.target}};
}

WorldModelRecord world_model_record_from_json(const nlohmann::json& j) {
  return {j.at("instruction").get<std::string>(), j.at("observation").get<std::string>(),
          j.at("action").get<std::string>(), j.at("target").get<std::string>()};
}

nlohmann::json to_json(const ValueRecord& r) {
  return {{"instruction", r.instruction},
          {"observation", r.observation},
          {"action", r.action},
          {"next_observation", r.next_observation},
          {"reward", r.reward}};
}

ValueRecord value_record_from_json(const nlohmann::json& j) {
  return {j.at("instruction").get<std::string>(), j.at("observation").get<std::string>(),
          j.at("action").get<std::string>(), j.at("next_observation").get<std::string>(),
          j.at("reward").get<double>()};
}

TrainingData build_training_data(const std::vector<TransitionTuple>& tuples, const ModelClient& abstraction,
                                 const AbstractionOptions& options, const MatchWeights& weights,
                                 const PromptLibrary& prompts) {
  TrainingData data;
  data.mode = std::string(to_string(options.use_model ? AbstractionMode::model : AbstractionMode::template_text));
  for (const TransitionTuple& tuple : tuples) {
    const std::string key = tuple.instruction.id + "#" + std::to_string(tuple.rollout) + "@" + std::to_string(tuple.t);
    try {
      AxTree before = parse_axtree(tuple.observation);
      AxTree after = parse_axtree(tuple.next_observation);
      before.url = tuple.url;
      after.url = tuple.next_url;
      const TransitionDelta delta = compute_delta(before, after, weights);
      std::vector<AxElement> tao;
      if (options.use_model && !after.empty()) tao = tao_state(before, after, weights);
      const AbstractedObservation target = describe_transition(tuple.instruction, before, parse_action(tuple.action),
                                                               delta, abstraction, options, &tao, prompts);
      if (options.use_model && target.warning) {
        data.skipped.push_back(key + ": " + *target.warning);
        continue;
      }
      const double reward = label_rewards(tuple.n).at(tuple.t - 1);
      data.world_model.push_back({tuple.instruction.goal_text, tuple.observation, tuple.action, target.text});
      data.value.push_back({tuple.instruction.goal_text, tuple.observation, tuple.action, tuple.next_observation, reward});
    } catch (const Error& e) {
      data.skipped.push_back(key + ": " + e.what());
    }
  }
  return data;
}

ExportPaths ExportPaths::in(const std::filesystem::path& directory) {
  return {directory / "world_model.jsonl", directory / "value.jsonl", directory / "manifest.json"};
}

void export_training_data(const TrainingData& data, const ExportPaths& paths, const std::string& config_digest) {
  std::string world;
  for (const WorldModelRecord& r : data.world_model) world += to_json(r).dump() + "\n";
  std::string value;
  for (const ValueRecord& r : data.value) value += to_json(r).dump() + "\n";
  const nlohmann::json manifest = {
      {"schema_version", 1},
      {"counts",
       {{"world_model", data.world_model.size()}, {"value", data.value.size()}, {"skipped", data.skipped.size()}}},
      {"skipped", data.skipped},
      {"mode", data.mode},
      {"config_digest", config_digest},
      {"tool_version", tool_version()}};
  write_file_atomic(paths.world_model, world);
  write_file_atomic(paths.value, value);
  write_file_atomic(paths.manifest, manifest.dump(2) + "\n");
}

std::vector<WorldModelRecord> read_world_model_jsonl(const std::filesystem::path& path) {
  std::vector<WorldModelRecord> out;
  for (const nlohmann::json& j : read_jsonl(path)) out.push_back(world_model_record_from_json(j));
  return out;
}

std::vector<ValueRecord> read_value_jsonl(const std::filesystem::path& path) {
  std::vector<ValueRecord> out;
  for (const nlohmann::json& j : read_jsonl(path)) out.push_back(value_record_from_json(j));
  return out;
}

namespace {

// Drops list markers such as "1.", "2)", "-" and "*".
std::string strip_marker(std::string line) {
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  std::size_t j = i;
  while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
  if (j > i && j < line.size() && (line[j] == '.' || line[j] == ')')) {
    i = j + 1;
  } else if (i < line.size() && (line[i] == '-' || line[i] == '*')) {
    ++i;
  }
  return normalize_whitespace(std::string_view(line).substr(i));
}

}  // namespace

SynthesisResult synthesize_instructions(const std::vector<Instruction>& seeds, const ModelClient& model,
                                        std::size_t count, const PromptLibrary& prompts) {
  SynthesisResult result;
  if (count == 0) return result;
  if (seeds.empty()) throw InvalidArgument("instruction synthesis needs at least one seed instruction");
  std::string examples;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    examples += (i ? "\n" : "") + std::to_string(i + 1) + ". " + seeds[i].goal_text;
  }
  const ChatResponse response = model.complete(
      model.make_request(prompts.render("synthesize_instructions", {{"examples", examples}, {"count", std::to_string(count)}})));

  std::set<std::string> seen;
  for (const Instruction& s : seeds) seen.insert(normalize_whitespace(s.goal_text));
  for (const std::string& choice : response.choices) {
    std::size_t start = 0;
    while (start <= choice.size() && result.instructions.size() < count) {
      std::size_t end = choice.find('\n', start);
      if (end == std::string::npos) end = choice.size();
      const std::string goal = strip_marker(choice.substr(start, end - start));
      start = end + 1;
      if (goal.empty() || !seen.insert(goal).second) continue;
      result.instructions.push_back(
          {"syn-" + std::to_string(result.instructions.size() + 1), goal, seeds.front().domain_tag});
    }
  }
  result.insufficient = result.instructions.size() < count;
  return result;
}

}  // namespace wma
