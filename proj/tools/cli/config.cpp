#include "config.hpp"

#include <chrono>
#include <set>

#include "wma/digest.hpp"
#include "wma/error.hpp"
#include "wma/oracle.hpp"
#include "wma/serialize.hpp"

namespace wma::cli {
namespace {

void require_object(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
}

template <typename T>
T get_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
      throw ConfigError(path, "expected a non-negative integer");
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  }
  return j.get<T>();
}

bool get_bool(const nlohmann::json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

void apply_agent(AgentConfig& agent, const nlohmann::json& j) {
  require_object(j, "/agent");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "/agent/" + key;
    if (key == "k") {
      agent.k = get_number<std::size_t>(value, path);
    } else if (key == "n_samples") {
      agent.n_samples = get_number<int>(value, path);
    } else if (key == "top_p") {
      agent.top_p = get_number<double>(value, path);
    } else if (key == "max_steps") {
      agent.max_steps = get_number<int>(value, path);
    } else if (key == "seed") {
      agent.seed = get_number<std::uint64_t>(value, path);
    } else if (key == "score_mode") {
      const std::string mode = get_string(value, path);
      if (mode == "with_next_state") {
        agent.score_mode = ScoreMode::with_next_state;
      } else if (mode == "q_value") {
        agent.score_mode = ScoreMode::q_value;
      } else {
        throw ConfigError(path, "expected 'with_next_state' or 'q_value'");
      }
    } else if (key == "history_window") {
      agent.history_window = get_number<std::size_t>(value, path);
    } else if (key == "raw_history") {
      agent.raw_history = get_bool(value, path);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }
}

void apply_abstraction(AbstractionOptions& options, const nlohmann::json& j) {
  require_object(j, "/abstraction");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "/abstraction/" + key;
    if (key == "use_model") {
      options.use_model = get_bool(value, path);
    } else if (key == "include_observation") {
      options.include_observation = get_bool(value, path);
    } else if (key == "two_stage") {
      options.two_stage = get_bool(value, path);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }
}

void apply_search(SearchOptions& search, const nlohmann::json& j) {
  require_object(j, "/search");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "/search/" + key;
    if (key == "width") {
      search.width = get_number<std::size_t>(value, path);
    } else if (key == "depth") {
      search.depth = get_number<std::size_t>(value, path);
    } else if (key == "budget") {
      search.budget = get_number<std::size_t>(value, path);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }
}

void apply_sampling(SamplingDefaults& sampling, const nlohmann::json& j) {
  require_object(j, "/sampling");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "/sampling/" + key;
    if (key == "model_id") {
      sampling.model_id = get_string(value, path);
    } else if (key == "temperature") {
      sampling.temperature = get_number<double>(value, path);
    } else if (key == "max_tokens") {
      sampling.max_tokens = get_number<int>(value, path);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }
}

void apply_http(HttpOptions& http, const nlohmann::json& j) {
  require_object(j, "/http");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "/http/" + key;
    if (key == "base_url") {
      http.base_url = get_string(value, path);
    } else if (key == "api_key_env") {
      http.api_key_env = get_string(value, path);
    } else if (key == "timeout_ms") {
      http.timeout = std::chrono::milliseconds(get_number<std::int64_t>(value, path));
    } else if (key == "retries") {
      http.retries = get_number<int>(value, path);
    } else if (key == "backoff_ms") {
      http.backoff = std::chrono::milliseconds(get_number<std::int64_t>(value, path));
    } else if (key == "native_n") {
      http.native_n = get_bool(value, path);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }
}

std::string spec_kind(const std::string& spec) { return spec.substr(0, spec.find(':')); }

}  // namespace

nlohmann::json Config::to_json() const {
  nlohmann::json backend_json = nlohmann::json::object();
  for (const auto& [role, spec] : backends) backend_json[role] = spec;
  return {
      {"backends", backend_json},
      {"agent",
       {{"k", agent.k},
        {"n_samples", agent.n_samples},
        {"top_p", agent.top_p},
        {"max_steps", agent.max_steps},
        {"seed", agent.seed},
        {"score_mode", agent.score_mode == ScoreMode::q_value ? "q_value" : "with_next_state"},
        {"history_window", agent.history_window},
        {"raw_history", agent.raw_history}}},
      {"abstraction",
       {{"use_model", agent.abstraction.use_model},
        {"include_observation", agent.abstraction.include_observation},
        {"two_stage", agent.abstraction.two_stage}}},
      {"match", wma::to_json(agent.match)},
      {"search", {{"width", search.width}, {"depth", search.depth}, {"budget", search.budget}}},
      {"harvest", {{"rollouts", rollouts}}},
      {"sampling",
       {{"model_id", sampling.model_id}, {"temperature", sampling.temperature}, {"max_tokens", sampling.max_tokens}}},
      {"http",
       {{"base_url", http.base_url},
        {"api_key_env", http.api_key_env},
        {"timeout_ms", http.timeout.count()},
        {"retries", http.retries},
        {"backoff_ms", http.backoff.count()},
        {"native_n", http.native_n}}},
      {"paths", paths},
      {"prices", prices.to_json()},
  };
}

void Config::apply(const nlohmann::json& j) {
  require_object(j, "");
  for (const auto& [key, value] : j.items()) {
    if (key == "backends") {
      require_object(value, "/backends");
      for (const auto& [role, spec] : value.items()) {
        if (!model_role_from_string(role)) throw ConfigError("/backends/" + role, "unknown role");
        backends[role] = get_string(spec, "/backends/" + role);
      }
    } else if (key == "agent") {
      apply_agent(agent, value);
    } else if (key == "abstraction") {
      apply_abstraction(agent.abstraction, value);
    } else if (key == "match") {
      // Partial overrides keep the fields that are already set.
      require_object(value, "/match");
      nlohmann::json merged = wma::to_json(agent.match);
      for (const auto& [field, v] : value.items()) merged[field] = v;
      agent.match = match_weights_from_json(merged, "/match");
    } else if (key == "search") {
      apply_search(search, value);
    } else if (key == "harvest") {
      require_object(value, "/harvest");
      for (const auto& [field, v] : value.items()) {
        if (field != "rollouts") throw ConfigError("/harvest/" + field, "unknown key");
        rollouts = get_number<std::size_t>(v, "/harvest/rollouts");
      }
    } else if (key == "sampling") {
      apply_sampling(sampling, value);
    } else if (key == "http") {
      apply_http(http, value);
    } else if (key == "paths") {
      require_object(value, "/paths");
      for (const auto& [name, v] : value.items()) {
        if (name != "scenario" && name != "prompts" && name != "cassette") {
          throw ConfigError("/paths/" + name, "unknown key");
        }
        paths[name] = get_string(v, "/paths/" + name);
      }
    } else if (key == "prices") {
      try {
        prices = PriceTable::from_json(value);
      } catch (const ConfigError& e) {
        throw ConfigError("/prices" + e.key_path(), e.what());
      }
    } else {
      throw ConfigError("/" + key, "unknown key");
    }
  }
  try {
    agent.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("/agent", e.what());
  }
}

std::string config_digest(const Config& config) { return short_digest(config.to_json().dump()); }

bool uses_network(const Config& config) {
  for (const auto& [_, spec] : config.backends) {
    const std::string kind = spec_kind(spec);
    if (kind == "http") return true;
    if (kind == "record") {
      const auto at = spec.find('@');
      if (at == std::string::npos) return true;
      const std::string inner = spec_kind(spec.substr(at + 1));
      if (inner == "http" || inner == "record") return true;
    }
  }
  return false;
}

BackendRegistry::BackendRegistry(const Config& config, std::shared_ptr<const Scenario> scenario)
    : config_(config), scenario_(std::move(scenario)) {
  if (const auto it = config.paths.find("prompts"); it != config.paths.end()) {
    owned_prompts_ = std::make_unique<PromptLibrary>(PromptLibrary::from_directory(it->second));
    prompts_ = owned_prompts_.get();
  }
}

std::shared_ptr<ChatBackend> BackendRegistry::resolve(const std::string& spec) {
  if (const auto it = cache_.find(spec); it != cache_.end()) return it->second;

  const std::string kind = spec_kind(spec);
  const std::string arg = spec.find(':') == std::string::npos ? "" : spec.substr(spec.find(':') + 1);
  std::shared_ptr<ChatBackend> backend;
  if (kind == "none" || kind == "template") {
    backend = nullptr;
  } else if (kind == "mock") {
    if (arg.empty()) throw ConfigError("/backends", "mock: needs a script path");
    backend = std::make_shared<MockBackend>(MockScript::load(arg));
  } else if (kind == "replay") {
    if (arg.empty()) throw ConfigError("/backends", "replay: needs a cassette path");
    backend = std::make_shared<ReplayBackend>(arg);
  } else if (kind == "record") {
    const auto at = arg.find('@');
    const std::string cassette = arg.substr(0, at);
    if (cassette.empty()) throw ConfigError("/backends", "record: needs a cassette path");
    std::shared_ptr<ChatBackend> inner = resolve(at == std::string::npos ? "http" : arg.substr(at + 1));
    if (!inner) throw ConfigError("/backends", "record: needs a real backend to forward to");
    backend = std::make_shared<RecordingBackend>(inner, cassette);
  } else if (kind == "http") {
    HttpOptions options = config_.http;
    if (!arg.empty()) options.base_url = arg;
    backend = std::make_shared<HttpBackend>(options);
  } else if (kind == "oracle" || kind == "oracle-constant") {
    if (!scenario_) throw ConfigError("/backends", spec + " needs --scenario");
    OracleOptions options;
    options.constant_value = kind == "oracle-constant";
    backend = std::make_shared<MockBackend>(build_oracle_script(*scenario_, options, config_.agent.match));
  } else {
    throw ConfigError("/backends", "unknown backend spec '" + spec + "'");
  }
  cache_.emplace(spec, backend);
  return backend;
}

ModelClient BackendRegistry::client(ModelRole role) {
  const auto it = config_.backends.find(std::string(to_string(role)));
  if (it == config_.backends.end()) return ModelClient(nullptr, role, ledger_, config_.sampling);
  return ModelClient(resolve(it->second), role, ledger_, config_.sampling);
}

Backends BackendRegistry::backends() {
  Backends b;
  b.policy = client(ModelRole::policy);
  b.world = client(ModelRole::world);
  b.value = client(ModelRole::value);
  b.abstraction = client(ModelRole::abstraction);
  b.prompts = prompts_;
  return b;
}

}  // namespace wma::cli
