#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "wma/agent.hpp"
#include "wma/gateway.hpp"
#include "wma/ledger.hpp"
#include "wma/prompts.hpp"
#include "wma/sandbox.hpp"

namespace wma::cli {

/// Effective settings of one command. Built from the defaults, then the
/// --config file, then command-line flags.
///
/// File form (every section optional, unknown keys rejected):
///
///     {"backends": {"policy": "mock:p.json", "world": "...", ...},
///      "agent": {"k": 3, "n_samples": 20, "top_p": 1.0, "max_steps": 5,
///                "seed": 0, "score_mode": "with_next_state",
///                "history_window": 5, "raw_history": false},
///      "abstraction": {"use_model": false, "include_observation": false,
///                      "two_stage": false},
///      "match": {"w_name": 1.0, ...},
///      "search": {"width": 2, "depth": 1, "budget": 0},
///      "harvest": {"rollouts": 5},
///      "sampling": {"model_id": "default", "temperature": 1.0,
///                   "max_tokens": 512},
///      "http": {"base_url": "...", "api_key_env": "OPENAI_API_KEY",
///               "timeout_ms": 120000, "retries": 2, "backoff_ms": 500,
///               "native_n": true},
///      "paths": {"scenario": "...", "prompts": "..."},
///      "prices": {"default": {"prompt": 0, "completion": 0}, "roles": {...}}}
struct Config {
  /// Backend spec per role name; missing roles have no backend.
  std::map<std::string, std::string> backends;
  AgentConfig agent;
  SearchOptions search;
  std::size_t rollouts = 5;
  SamplingDefaults sampling;
  HttpOptions http;
  std::map<std::string, std::string> paths;
  PriceTable prices;

  nlohmann::json to_json() const;
  /// Overlays `j` onto this config. Unknown keys and bad values raise
  /// ConfigError naming the key path.
  void apply(const nlohmann::json& j);
};

/// short_digest of the effective config JSON.
std::string config_digest(const Config& config);

/// Turns backend specs into shared backend instances. Roles that name the
/// same spec share one instance.
///
///     none | template         no backend
///     mock:<script.json>      scripted replies
///     replay:<cassette>       recorded replies, never the network
///     record:<cassette>[@<spec>]  forward to <spec> (default http), append
///     http[:<base url>]       OpenAI-compatible endpoint
///     oracle | oracle-constant    generated from the scenario
class BackendRegistry {
 public:
  BackendRegistry(const Config& config, std::shared_ptr<const Scenario> scenario);

  std::shared_ptr<ChatBackend> resolve(const std::string& spec);
  ModelClient client(ModelRole role);
  Backends backends();

  const std::shared_ptr<CallLedger>& ledger() const noexcept { return ledger_; }
  const PromptLibrary& prompts() const noexcept { return *prompts_; }

 private:
  const Config& config_;
  std::shared_ptr<const Scenario> scenario_;
  std::shared_ptr<CallLedger> ledger_ = std::make_shared<CallLedger>();
  std::map<std::string, std::shared_ptr<ChatBackend>> cache_;
  std::unique_ptr<PromptLibrary> owned_prompts_;
  const PromptLibrary* prompts_ = &PromptLibrary::embedded();
};

/// True when any configured spec may reach the network.
bool uses_network(const Config& config);

}  // namespace wma::cli
