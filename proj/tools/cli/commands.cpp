#include <algorithm>
#include <charconv>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>

#include <CLI11.hpp>

#include "cli.hpp"
#include "config.hpp"
#include "wma/dataset.hpp"
#include "wma/digest.hpp"
#include "wma/error.hpp"
#include "wma/eval.hpp"
#include "wma/io.hpp"
#include "wma/oracle.hpp"
#include "wma/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace wma::cli {
namespace {

// --- shared flags ------------------------------------------------------------

// Flag values land in a JSON overlay so precedence is one rule:
// defaults, then the --config file, then this overlay.
struct ConfigFlags {
  std::string config_path;
  std::string backend_all;
  std::map<std::string, std::string> backend_roles;
  std::string scenario;
  std::string prompts;
  json overlay = json::object();
  int jobs = 1;

  template <typename T>
  void option(CLI::App* app, const std::string& name, const std::string& pointer, const std::string& help) {
    app->add_option_function<T>(
        name, [this, pointer](const T& v) { overlay[json::json_pointer(pointer)] = v; }, help);
  }
  void flag(CLI::App* app, const std::string& name, const std::string& pointer, const std::string& help) {
    app->add_flag_callback(name, [this, pointer] { overlay[json::json_pointer(pointer)] = true; }, help);
  }

  void add_common(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--prompts", prompts, "Directory of prompt assets overriding the built-in ones");
  }
  void add_backends(CLI::App* app) {
    app->add_option("--backend", backend_all, "Backend spec for every role");
    for (const char* role : {"policy", "world", "value", "abstraction", "judge"}) {
      app->add_option(std::string("--") + role + "-backend", backend_roles[role],
                      std::string("Backend spec for the ") + role + " role");
    }
  }
  void add_agent(CLI::App* app) {
    option<std::size_t>(app, "--k", "/agent/k", "Candidates kept after the frequency vote");
    option<int>(app, "--n-samples", "/agent/n_samples", "Policy samples per step");
    option<double>(app, "--top-p", "/agent/top_p", "Nucleus sampling mass");
    option<int>(app, "--max-steps", "/agent/max_steps", "Action budget per episode");
    option<std::uint64_t>(app, "--seed", "/agent/seed", "Run seed");
    option<std::string>(app, "--score-mode", "/agent/score_mode", "with_next_state or q_value");
    option<std::size_t>(app, "--history-window", "/agent/history_window", "Past steps shown to the policy");
    flag(app, "--raw-history", "/agent/raw_history", "Show raw observations in the history");
    flag(app, "--abstraction-model", "/abstraction/use_model", "Describe transitions with the abstraction model");
    flag(app, "--two-stage", "/abstraction/two_stage", "Refine the TaO state before describing it");
    flag(app, "--include-observation", "/abstraction/include_observation",
         "Show the full previous observation to the abstraction model");
    option<std::string>(app, "--model-id", "/sampling/model_id", "Model name sent to the backend");
    option<double>(app, "--temperature", "/sampling/temperature", "Sampling temperature");
  }
  void add_match(CLI::App* app) {
    option<double>(app, "--w-name", "/match/w_name", "Name mismatch weight");
    option<double>(app, "--w-role", "/match/w_role", "Role mismatch weight");
    option<double>(app, "--w-loc", "/match/w_loc", "Location distance weight");
    option<double>(app, "--tau", "/match/tau", "Size gate ratio");
    option<std::size_t>(app, "--x-limit", "/match/x_limit", "Most unmatched elements that still get neighbours");
    option<std::size_t>(app, "--y-limit", "/match/y_limit", "Neighbour distance");
    option<double>(app, "--match-threshold", "/match/match_threshold", "Highest cost of a kept match");
    option<std::string>(app, "--tao-mode", "/match/tao_mode", "strict or threshold");
  }
  void add_search(CLI::App* app) {
    option<std::size_t>(app, "--width", "/search/width", "Children expanded per node");
    option<std::size_t>(app, "--depth", "/search/depth", "Real steps explored ahead");
    option<std::size_t>(app, "--budget", "/search/budget", "Environment steps per search call");
  }
  void add_jobs(CLI::App* app) {
    app->add_option("--jobs", jobs, "Parallel workers for network backends")->check(CLI::PositiveNumber);
  }

  Config build() const {
    Config config;
    if (!config_path.empty()) {
      json file;
      try {
        file = json::parse(read_file(config_path));
      } catch (const json::parse_error& e) {
        throw ConfigError("/", std::string("config is not valid JSON: ") + e.what());
      }
      config.apply(file);
    }
    json flags = overlay;
    if (!backend_all.empty()) {
      for (const char* role : {"policy", "world", "value", "abstraction", "judge"}) flags["backends"][role] = backend_all;
    }
    for (const auto& [role, spec] : backend_roles) {
      if (!spec.empty()) flags["backends"][role] = spec;
    }
    if (!scenario.empty()) flags["paths"]["scenario"] = scenario;
    if (!prompts.empty()) flags["paths"]["prompts"] = prompts;
    config.apply(flags);
    return config;
  }
};

// --- output helpers ----------------------------------------------------------

json stamp(json j, const Config& config) {
  j["config_digest"] = config_digest(config);
  j["tool_version"] = std::string(tool_version());
  return j;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void write_manifest(const fs::path& dir, const std::string& subcommand, const Config& config,
                    std::vector<std::string> files, json extra = json::object()) {
  std::sort(files.begin(), files.end());
  json manifest = extra;
  manifest["subcommand"] = subcommand;
  manifest["config"] = config.to_json();
  manifest["files"] = files;
  write_json(dir / "manifest.json", stamp(manifest, config));
}

std::shared_ptr<const Scenario> load_scenario_from(const Config& config) {
  const auto it = config.paths.find("scenario");
  if (it == config.paths.end()) throw ConfigError("/paths/scenario", "a scenario is required (--scenario)");
  return std::make_shared<const Scenario>(load_scenario(it->second));
}

std::vector<std::string> select_tasks(const Scenario& scenario, const std::vector<std::string>& requested) {
  std::vector<std::string> ids;
  if (requested.empty()) {
    for (const ScenarioTask& task : scenario.tasks) ids.push_back(task.instruction.id);
    return ids;
  }
  for (const std::string& token : requested) {
    const auto by_id = std::find_if(scenario.tasks.begin(), scenario.tasks.end(),
                                    [&](const ScenarioTask& t) { return t.instruction.id == token; });
    if (by_id != scenario.tasks.end()) {
      ids.push_back(token);
      continue;
    }
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), index);
    if (ec != std::errc() || ptr != token.data() + token.size() || index >= scenario.tasks.size()) {
      throw ConfigError("/task", "no task '" + token + "' in scenario " + scenario.name);
    }
    ids.push_back(scenario.tasks[index].instruction.id);
  }
  return ids;
}

// Trajectory lines with the config stamp removed. A replay runs under a
// different backend spec than the recording, so only the content is compared.
std::vector<json> unstamped_lines(const std::string& text) {
  std::vector<json> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    const std::string line = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!line.empty()) {
      json j = json::parse(line);
      j.erase("config_digest");
      lines.push_back(std::move(j));
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return lines;
}

std::string trajectory_text(const Trajectory& trajectory, const Config& config) {
  std::string text;
  for (const StepRecord& step : trajectory.steps) text += to_json(step).dump() + "\n";
  text += stamp(trajectory_footer(trajectory), config).dump() + "\n";
  return text;
}

// Runs `work(i)` for i in [0, n). Results keep index order, so merged output
// does not depend on scheduling.
template <typename Result, typename Work>
std::vector<Result> ordered_map(std::size_t n, int jobs, Work work) {
  std::vector<Result> results(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = work(i);
    return results;
  }
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<Result>> batch;
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(jobs));
    for (std::size_t i = start; i < end; ++i) batch.push_back(std::async(std::launch::async, work, i));
    for (std::size_t i = start; i < end; ++i) results[i] = batch[i - start].get();
  }
  return results;
}

// --- episodes: run, search, refine, replay -----------------------------------

struct EpisodeArgs {
  std::vector<std::string> tasks;
  std::string out = "out";
  std::string mode = "wma";
  std::string cassette;
  std::string expect;
};

enum class EpisodeKind { run, search, refine, replay };

int cmd_episodes(EpisodeKind kind, const EpisodeArgs& args, const Config& config, std::ostream& out,
                 std::ostream& err) {
  const auto scenario = load_scenario_from(config);
  const std::vector<std::string> task_ids = select_tasks(*scenario, args.tasks);
  BackendRegistry registry(config, scenario);
  const Backends backends = registry.backends();

  AgentMode mode = AgentMode::wma;
  if (kind == EpisodeKind::refine) {
    mode = AgentMode::self_refine;
  } else if (kind != EpisodeKind::search) {
    const auto parsed = agent_mode_from_string(args.mode);
    if (!parsed) throw ConfigError("/mode", "expected baseline, wma or refine");
    mode = *parsed;
  }

  const fs::path out_dir(args.out);
  const GoalCheck goal = [](const Environment& env) { return static_cast<const SandboxEnv&>(env).goal_met(); };
  json summary_tasks = json::array();
  std::vector<std::string> files = {"ledger.json", "summary.json"};
  std::size_t successes = 0;
  bool mismatch = false;

  for (const std::string& id : task_ids) {
    SandboxEnv env(scenario, id);
    const Instruction& instruction = env.task().instruction;
    Trajectory trajectory;
    try {
      trajectory = kind == EpisodeKind::search
                       ? run_search_episode(env, backends, instruction, config.agent, config.search, goal)
                       : run_episode(env, backends, instruction, config.agent, mode, goal);
    } catch (const EpisodeFailed& e) {
      trajectory = e.partial();
    }
    const std::string name = id + ".jsonl";
    const std::string text = trajectory_text(trajectory, config);
    write_file_atomic(out_dir / name, text);
    files.push_back(name);
    if (trajectory.success) ++successes;
    summary_tasks.push_back({{"task_id", id},
                             {"success", trajectory.success},
                             {"outcome", trajectory.outcome},
                             {"steps", trajectory.steps.size()}});
    out << id << ": " << (trajectory.success ? "success" : "failure") << " (" << trajectory.outcome << ", "
        << trajectory.steps.size() << " steps)\n";

    if (!args.expect.empty()) {
      const fs::path expected = fs::path(args.expect) / name;
      if (!fs::exists(expected) || unstamped_lines(read_file(expected)) != unstamped_lines(text)) {
        err << "replay mismatch: " << name << " differs from " << expected.string() << "\n";
        mismatch = true;
      }
    }
  }

  const double rate = task_ids.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(task_ids.size());
  json ledger = registry.ledger()->to_json();
  ledger["episodes"] = task_ids.size();
  write_json(out_dir / "ledger.json", stamp(ledger, config));
  write_json(out_dir / "summary.json", stamp({{"scenario", scenario->name},
                                              {"mode", kind == EpisodeKind::search ? "search" : to_string(mode)},
                                              {"tasks", summary_tasks},
                                              {"successes", successes},
                                              {"total", task_ids.size()},
                                              {"success_rate", rate}},
                                             config));
  const char* names[] = {"run", "search", "refine", "replay"};
  write_manifest(out_dir, names[static_cast<int>(kind)], config, files);
  out << "success rate: " << successes << "/" << task_ids.size() << "\n";
  if (mismatch) return kExitTaskFailed;
  return successes == task_ids.size() ? kExitOk : kExitTaskFailed;
}

// --- collect -----------------------------------------------------------------

struct CollectArgs {
  std::vector<std::string> tasks;
  std::string out = "out";
  std::size_t synthesize = 0;
};

int cmd_collect(const CollectArgs& args, const Config& config, int jobs, std::ostream& out) {
  const auto scenario = load_scenario_from(config);
  const std::vector<std::string> task_ids = select_tasks(*scenario, args.tasks);
  BackendRegistry registry(config, scenario);
  const Backends backends = registry.backends();

  // Synthesized instructions start where the first selected task starts.
  std::vector<Instruction> instructions;
  std::map<std::string, std::string> task_of;
  for (const std::string& id : task_ids) {
    instructions.push_back(scenario->task(id).instruction);
    task_of[id] = id;
  }
  bool insufficient = false;
  if (args.synthesize > 0) {
    const SynthesisResult synthesized =
        synthesize_instructions(instructions, backends.policy, args.synthesize, registry.prompts());
    insufficient = synthesized.insufficient;
    for (const Instruction& instruction : synthesized.instructions) {
      task_of[instruction.id] = task_ids.front();
      instructions.push_back(instruction);
    }
  }

  HarvestConfig harvest;
  harvest.rollouts = config.rollouts;
  harvest.max_steps = config.agent.max_steps;
  harvest.top_p = config.agent.top_p;
  harvest.seed = config.agent.seed;
  const EnvFactory factory = [&](const Instruction& instruction) -> std::unique_ptr<Environment> {
    return std::make_unique<SandboxEnv>(scenario, task_of.at(instruction.id));
  };

  // Rollout seeds depend only on the instruction, so per-instruction work
  // can be split across workers without changing the result.
  const int workers = uses_network(config) ? jobs : 1;
  const auto parts = ordered_map<HarvestResult>(instructions.size(), workers, [&](std::size_t i) {
    return collect_trajectories(factory, backends, {instructions[i]}, harvest);
  });
  HarvestResult result;
  for (const HarvestResult& part : parts) {
    result.tuples.insert(result.tuples.end(), part.tuples.begin(), part.tuples.end());
    result.trajectories += part.trajectories;
    result.faults.insert(result.faults.end(), part.faults.begin(), part.faults.end());
  }

  const fs::path out_dir(args.out);
  std::string tuples;
  for (const TransitionTuple& tuple : result.tuples) tuples += to_json(tuple).dump() + "\n";
  write_file_atomic(out_dir / "tuples.jsonl", tuples);
  std::string instruction_lines;
  for (const Instruction& instruction : instructions) {
    instruction_lines +=
        json{{"id", instruction.id}, {"goal", instruction.goal_text}, {"domain", instruction.domain_tag}}.dump() + "\n";
  }
  write_file_atomic(out_dir / "instructions.jsonl", instruction_lines);
  write_manifest(out_dir, "collect", config, {"instructions.jsonl", "tuples.jsonl"},
                 {{"counts",
                   {{"instructions", instructions.size()},
                    {"trajectories", result.trajectories},
                    {"tuples", result.tuples.size()}}},
                  {"faults", result.faults},
                  {"synthesis_insufficient", insufficient}});
  out << "collected " << result.tuples.size() << " tuples from " << result.trajectories << " rollouts\n";
  return kExitOk;
}

// --- export ------------------------------------------------------------------

std::vector<TransitionTuple> read_tuples(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "tuples.jsonl" : path;
  std::vector<TransitionTuple> tuples;
  for (const json& j : read_jsonl(file)) tuples.push_back(transition_tuple_from_json(j));
  return tuples;
}

struct ExportArgs {
  std::string tuples;
  std::string out = "out";
  bool no_dedup = false;
};

int cmd_export(const ExportArgs& args, const Config& config, std::ostream& out) {
  std::vector<TransitionTuple> tuples = read_tuples(args.tuples);
  std::size_t removed = 0;
  if (!args.no_dedup) {
    DedupResult dedup = dedupe_state_actions(tuples);
    removed = dedup.removed;
    tuples = std::move(dedup.tuples);
  }
  BackendRegistry registry(config, nullptr);
  const TrainingData data = build_training_data(tuples, registry.client(ModelRole::abstraction),
                                                config.agent.abstraction, config.agent.match, registry.prompts());
  export_training_data(data, ExportPaths::in(args.out), config_digest(config));
  out << "exported " << data.world_model.size() << " world-model and " << data.value.size()
      << " value records (" << removed << " duplicates removed, " << data.skipped.size() << " skipped)\n";
  return kExitOk;
}

// --- diff --------------------------------------------------------------------

struct DiffArgs {
  std::string before;
  std::string after;
  std::string format = "json";
  std::string out;
  bool tao = false;
};

int cmd_diff(const DiffArgs& args, const Config& config, std::ostream& out) {
  const AxTree before = parse_axtree(read_file(args.before));
  const AxTree after = parse_axtree(read_file(args.after));
  const TransitionDelta delta = compute_delta(before, after, config.agent.match);

  std::string text;
  if (args.format == "json") {
    json j = wma::to_json(delta);
    if (args.tao) {
      const TaoResult tao = tao_state_detail(before, after, config.agent.match);
      json elements = json::array();
      for (const AxElement& e : tao.elements) elements.push_back(wma::to_json(e));
      j["tao"] = {{"elements", elements}, {"unmatched", tao.unmatched}};
    }
    text = stamp(j, config).dump(2) + "\n";
  } else if (args.format == "text") {
    text = delta.empty() ? std::string(kNoObservableChange) + "\n" : render_delta_text(delta) + "\n";
    if (args.tao) {
      text += "\n[TAO STATE]\n";
      for (const AxElement& e : tao_state(before, after, config.agent.match)) text += render_element(e) + "\n";
    }
  } else {
    throw ConfigError("/format", "expected json or text");
  }
  if (args.out.empty()) {
    out << text;
  } else {
    write_file_atomic(args.out, text);
  }
  return kExitOk;
}

// --- eval --------------------------------------------------------------------

GoldStep gold_step_from_json(const json& j) {
  if (j.is_string()) return {parse_action(j.get<std::string>()), {}};
  GoldStep step{action_from_json(j.at("action")), {}};
  if (j.contains("elements")) step.elements = j.at("elements").get<std::vector<std::int64_t>>();
  return step;
}

std::vector<TaskPrediction> predictions_from_file(const fs::path& path) {
  std::vector<TaskPrediction> predictions;
  for (const json& j : read_jsonl(path)) {
    TaskPrediction p;
    p.task_id = j.at("task_id").get<std::string>();
    for (const json& a : j.at("predicted")) p.predicted.push_back(action_from_json(a));
    for (const json& g : j.at("gold")) p.gold.push_back(gold_step_from_json(g));
    predictions.push_back(std::move(p));
  }
  return predictions;
}

std::vector<TaskPrediction> predictions_from_trajectories(const Scenario& scenario, const fs::path& dir) {
  std::vector<TaskPrediction> predictions;
  for (const ScenarioTask& task : scenario.tasks) {
    const fs::path file = dir / (task.instruction.id + ".jsonl");
    if (!fs::exists(file)) continue;
    TaskPrediction p;
    p.task_id = task.instruction.id;
    for (const json& line : read_jsonl(file)) {
      if (line.value("type", "") != "step") continue;
      if (line.contains("executed")) {
        for (const json& a : line.at("executed")) p.predicted.push_back(parse_action(a.get<std::string>()));
      } else {
        p.predicted.push_back(parse_action(line.at("chosen").get<std::string>()));
      }
    }
    for (const std::string& gold : task.gold) p.gold.push_back({parse_action(gold), {}});
    predictions.push_back(std::move(p));
  }
  return predictions;
}

struct EvalArgs {
  std::string predictions;
  std::string trajectories;
  std::string out;
};

int cmd_eval(const EvalArgs& args, const Config& config, std::ostream& out) {
  std::vector<TaskPrediction> predictions;
  if (!args.predictions.empty()) {
    predictions = predictions_from_file(args.predictions);
  } else if (!args.trajectories.empty()) {
    predictions = predictions_from_trajectories(*load_scenario_from(config), args.trajectories);
  } else {
    throw ConfigError("/predictions", "pass --predictions or --scenario with --trajectories");
  }
  // Judging is a pure function of each prediction; the report sorts tasks
  // by id so input order does not leak into the output.
  std::sort(predictions.begin(), predictions.end(),
            [](const TaskPrediction& a, const TaskPrediction& b) { return a.task_id < b.task_id; });
  const MetricsReport report = compute_metrics(predictions);
  if (!args.out.empty()) write_json(args.out, stamp(report.to_json(), config));
  out << report.to_text();
  return kExitOk;
}

// --- prelim ------------------------------------------------------------------

struct PrelimArgs {
  std::string tuples;
  std::string harness = "mcq";
  bool next_state = false;
  std::size_t choices = 4;
  std::string out = "out";
};

std::vector<SelectionItem> selection_items(const std::vector<TransitionTuple>& tuples, std::size_t choices,
                                           std::uint64_t seed) {
  std::set<std::string> pool_set;
  std::map<std::pair<std::string, std::string>, std::string> outcome;
  for (const TransitionTuple& t : tuples) {
    pool_set.insert(t.action);
    outcome.emplace(std::make_pair(observation_digest(t.observation), t.action), t.next_observation);
  }
  const std::vector<std::string> fillers = {"scroll [down]", "scroll [up]", "go_back", "hover [1]", "stop [N/A]"};
  for (const std::string& f : fillers) pool_set.insert(f);
  const std::vector<std::string> pool(pool_set.begin(), pool_set.end());

  // One item per (objective, state): rollouts may take different actions
  // from the same state, and two labels for one prompt would be ambiguous.
  std::set<std::pair<std::string, std::string>> asked;
  std::vector<SelectionItem> items;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const TransitionTuple& t = tuples[i];
    if (!asked.emplace(t.instruction.goal_text, observation_digest(t.observation)).second) continue;
    std::vector<std::string> negatives;
    for (const std::string& a : pool) {
      if (a != t.action) negatives.push_back(a);
    }
    std::mt19937_64 rng(seed + i);
    std::shuffle(negatives.begin(), negatives.end(), rng);
    negatives.resize(std::min(negatives.size(), choices - 1));
    std::sort(negatives.begin(), negatives.end());

    // Unknown outcomes are assumed to leave the page as it is.
    const std::string digest = observation_digest(t.observation);
    std::vector<std::string> states = {t.next_observation};
    for (const std::string& a : negatives) {
      const auto it = outcome.find({digest, a});
      states.push_back(it == outcome.end() ? t.observation : it->second);
    }
    items.push_back(make_selection_item(t.instruction.goal_text, t.observation, t.action, negatives, seed + i, states));
  }
  return items;
}

int cmd_prelim(const PrelimArgs& args, const Config& config, std::ostream& out) {
  const std::vector<TransitionTuple> tuples = read_tuples(args.tuples);
  const std::uint64_t seed = config.agent.seed;
  const auto spec_it = config.backends.find("policy");
  const std::string spec = spec_it == config.backends.end() ? "none" : spec_it->second;
  BackendRegistry registry(config, nullptr);

  std::string item_lines;
  std::size_t skipped = 0;
  HarnessReport report;
  std::shared_ptr<ChatBackend> backend;
  if (args.harness == "mcq") {
    std::vector<McqItem> items;
    // One trajectory per (instruction, rollout), in first-seen order.
    std::vector<std::vector<TransitionTuple>> groups;
    std::map<std::pair<std::string, std::size_t>, std::size_t> index;
    for (const TransitionTuple& t : tuples) {
      const auto [it, fresh] = index.emplace(std::make_pair(t.instruction.id, t.rollout), groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(t);
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      try {
        for (McqItem& item : build_next_state_mcq(groups[g], seed + g)) items.push_back(std::move(item));
      } catch (const InsufficientStates&) {
        ++skipped;
      }
    }
    if (spec == "oracle") {
      backend = std::make_shared<MockBackend>(build_mcq_oracle_script(items));
    } else if (spec == "coin") {
      backend = std::make_shared<MockBackend>(build_coin_flip_script(seed));
    } else {
      backend = registry.resolve(spec);
    }
    report = run_mcq_eval(items, ModelClient(backend, ModelRole::judge, registry.ledger(), config.sampling),
                          registry.prompts());
    for (const McqItem& item : items) item_lines += to_json(item).dump() + "\n";
  } else if (args.harness == "selection") {
    if (args.choices < 2) throw ConfigError("/choices", "expected at least 2");
    const std::vector<SelectionItem> items = selection_items(tuples, args.choices, seed);
    if (spec == "oracle") {
      backend = std::make_shared<MockBackend>(build_selection_oracle_script(items, args.next_state));
    } else if (spec == "uniform") {
      backend = std::make_shared<MockBackend>(build_uniform_selection_script(args.choices, seed));
    } else {
      backend = registry.resolve(spec);
    }
    report = run_action_selection_eval(
        items, ModelClient(backend, ModelRole::judge, registry.ledger(), config.sampling), args.next_state,
        registry.prompts());
    for (const SelectionItem& item : items) item_lines += to_json(item).dump() + "\n";
  } else {
    throw ConfigError("/harness", "expected mcq or selection");
  }

  const fs::path out_dir(args.out);
  write_file_atomic(out_dir / "items.jsonl", item_lines);
  json j = report.to_json();
  j["harness"] = args.harness;
  j["with_next_state"] = args.next_state;
  j["skipped_trajectories"] = skipped;
  write_json(out_dir / "report.json", stamp(j, config));
  write_manifest(out_dir, "prelim", config, {"items.jsonl", "report.json"});
  out << args.harness << " accuracy: " << report.correct << "/" << report.items.size() << " ("
      << report.unparseable << " unparseable)\n";
  return kExitOk;
}

// --- report ------------------------------------------------------------------

struct ReportArgs {
  std::string ledger;
  std::string prices;
  std::size_t episodes = 0;
  std::string out;
};

int cmd_report(const ReportArgs& args, const Config& config, std::ostream& out) {
  const json ledger_json = json::parse(read_file(args.ledger));
  const CallLedger ledger = CallLedger::from_json(ledger_json);
  PriceTable prices = config.prices;
  if (!args.prices.empty()) prices = PriceTable::from_json(json::parse(read_file(args.prices)));
  std::size_t episodes = args.episodes;
  if (episodes == 0 && ledger_json.contains("episodes")) episodes = ledger_json.at("episodes").get<std::size_t>();
  const LedgerReport report = ledger_report(ledger, prices, episodes);
  if (!args.out.empty()) write_json(args.out, stamp(report.json, config));
  out << report.text;
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"World-model-augmented web agent toolkit", "wma"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version()));

  ConfigFlags flags;
  EpisodeArgs episode;
  CollectArgs collect;
  ExportArgs export_args;
  DiffArgs diff;
  EvalArgs eval;
  PrelimArgs prelim;
  ReportArgs report;

  auto* collect_cmd = app.add_subcommand("collect", "Harvest (instruction, observation, action, next) tuples");
  auto* export_cmd = app.add_subcommand("export", "Build world-model and value training files from tuples");
  auto* diff_cmd = app.add_subcommand("diff", "Classify the changes between two accessibility trees");
  auto* run_cmd = app.add_subcommand("run", "Run episodes with simulate-score-select");
  auto* search_cmd = app.add_subcommand("search", "Run episodes with multi-step tree search");
  auto* refine_cmd = app.add_subcommand("refine", "Run episodes with single-round self-refinement");
  auto* eval_cmd = app.add_subcommand("eval", "Compute element accuracy, action F1, step and task success");
  auto* prelim_cmd = app.add_subcommand("prelim", "Next-state and action-selection probes");
  auto* replay_cmd = app.add_subcommand("replay", "Re-run episodes from a recorded cassette");
  auto* report_cmd = app.add_subcommand("report", "Cost and time table from a call ledger");

  for (CLI::App* sub : {collect_cmd, export_cmd, diff_cmd, run_cmd, search_cmd, refine_cmd, eval_cmd, prelim_cmd,
                        replay_cmd, report_cmd}) {
    flags.add_common(sub);
  }
  for (CLI::App* sub : {collect_cmd, run_cmd, search_cmd, refine_cmd, replay_cmd}) {
    sub->add_option("--scenario", flags.scenario, "Scenario JSON file");
    sub->add_option("--task", sub == collect_cmd ? collect.tasks : episode.tasks, "Task id or index (repeatable)");
    flags.add_backends(sub);
    flags.add_agent(sub);
    flags.add_match(sub);
  }
  for (CLI::App* sub : {export_cmd, prelim_cmd}) {
    flags.add_backends(sub);
    flags.add_agent(sub);
    flags.add_match(sub);
  }
  flags.add_match(diff_cmd);
  flags.add_search(search_cmd);
  flags.add_jobs(collect_cmd);
  flags.add_jobs(eval_cmd);

  for (CLI::App* sub : {run_cmd, search_cmd, refine_cmd, replay_cmd}) {
    sub->add_option("--out", episode.out, "Output directory");
  }
  for (CLI::App* sub : {run_cmd, replay_cmd}) {
    sub->add_option("--mode", episode.mode, "baseline, wma or refine");
  }
  replay_cmd->add_option("--cassette", episode.cassette, "Cassette serving every role without its own backend")
      ->required();
  replay_cmd->add_option("--expect", episode.expect, "Directory of trajectories the replay must reproduce");

  collect_cmd->add_option("--out", collect.out, "Output directory");
  collect_cmd->add_option("--synthesize", collect.synthesize, "Extra instructions to synthesize with the policy");
  flags.option<std::size_t>(collect_cmd, "--rollouts", "/harvest/rollouts", "Rollouts per instruction");

  export_cmd->add_option("--tuples", export_args.tuples, "tuples.jsonl or a collect output directory")->required();
  export_cmd->add_option("--out", export_args.out, "Output directory");
  export_cmd->add_flag("--no-dedup", export_args.no_dedup, "Keep repeated (state, action) pairs");

  diff_cmd->add_option("before", diff.before, "Tree before the action")->required()->check(CLI::ExistingFile);
  diff_cmd->add_option("after", diff.after, "Tree after the action")->required()->check(CLI::ExistingFile);
  diff_cmd->add_option("--format", diff.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  diff_cmd->add_option("--out", diff.out, "Write to this file instead of stdout");
  diff_cmd->add_flag("--tao", diff.tao, "Include the transition-aware element subset");

  eval_cmd->add_option("--predictions", eval.predictions, "JSONL of {task_id, predicted, gold}");
  eval_cmd->add_option("--trajectories", eval.trajectories, "Directory of trajectory logs");
  eval_cmd->add_option("--scenario", flags.scenario, "Scenario holding the gold actions");
  eval_cmd->add_option("--out", eval.out, "Write the JSON report here");

  prelim_cmd->add_option("--tuples", prelim.tuples, "tuples.jsonl or a collect output directory")->required();
  prelim_cmd->add_option("--harness", prelim.harness, "mcq or selection")->check(CLI::IsMember({"mcq", "selection"}));
  prelim_cmd->add_flag("--next-state", prelim.next_state, "Show each choice's resulting state");
  prelim_cmd->add_option("--choices", prelim.choices, "Choices per selection item");
  prelim_cmd->add_option("--out", prelim.out, "Output directory");

  report_cmd->add_option("--ledger", report.ledger, "ledger.json written by run, search or refine")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("--prices", report.prices, "Price table JSON")->check(CLI::ExistingFile);
  report_cmd->add_option("--episodes", report.episodes, "Episodes for per-episode rows");
  report_cmd->add_option("--out", report.out, "Write the JSON table here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (replay_cmd->parsed()) flags.overlay["paths"]["cassette"] = episode.cassette;
    Config config = flags.build();
    if (replay_cmd->parsed()) {
      for (const char* role : {"policy", "world", "value", "abstraction", "judge"}) {
        if (flags.backend_roles[role].empty() && flags.backend_all.empty()) {
          config.backends[role] = "replay:" + episode.cassette;
        }
      }
    }
    std::optional<network::ScopedForbid> offline;
    if (!uses_network(config)) offline.emplace();

    if (collect_cmd->parsed()) return cmd_collect(collect, config, flags.jobs, out);
    if (export_cmd->parsed()) return cmd_export(export_args, config, out);
    if (diff_cmd->parsed()) return cmd_diff(diff, config, out);
    if (run_cmd->parsed()) return cmd_episodes(EpisodeKind::run, episode, config, out, err);
    if (search_cmd->parsed()) return cmd_episodes(EpisodeKind::search, episode, config, out, err);
    if (refine_cmd->parsed()) return cmd_episodes(EpisodeKind::refine, episode, config, out, err);
    if (replay_cmd->parsed()) return cmd_episodes(EpisodeKind::replay, episode, config, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval, config, out);
    if (prelim_cmd->parsed()) return cmd_prelim(prelim, config, out);
    if (report_cmd->parsed()) return cmd_report(report, config, out);
  } catch (const ConfigError& e) {
    err << "config error at " << e.key_path() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DanglingReference& e) {
    err << "scenario error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "malformed JSON input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitTaskFailed;
  }
  return kExitUsage;
}

}  // namespace wma::cli
