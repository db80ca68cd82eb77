#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wma/chat.hpp"
#include "wma/ledger.hpp"

namespace wma {

/// A chat-completion provider. Implementations must be safe to call from
/// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Process-wide switch that makes every network attempt fail. Tests use it
/// to prove that offline backends never reach the network.
namespace network {
void set_forbidden(bool forbidden) noexcept;
bool forbidden() noexcept;
/// Number of network operations attempted since the last reset.
std::size_t attempts() noexcept;
void reset_attempts() noexcept;

namespace detail {
/// Called by every backend before it opens a connection.
void note_attempt();
}  // namespace detail

class ScopedForbid {
 public:
  ScopedForbid() : previous_(forbidden()) { set_forbidden(true); }
  ~ScopedForbid() { set_forbidden(previous_); }
  ScopedForbid(const ScopedForbid&) = delete;
  ScopedForbid& operator=(const ScopedForbid&) = delete;

 private:
  bool previous_;
};
}  // namespace network

// --- HTTP --------------------------------------------------------------------

struct HttpOptions {
  /// Base URL including the API version prefix; requests go to
  /// <base_url>/chat/completions.
  std::string base_url = "https://api.openai.com/v1";
  /// Environment variable holding the bearer token. Empty disables auth.
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{120'000};
  int retries = 2;
  std::chrono::milliseconds backoff{500};
  /// Send `n` natively; otherwise n_samples is emulated with repeated calls.
  bool native_n = true;
};

/// OpenAI-compatible /chat/completions client.
class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(HttpOptions options);
  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return "http:" + options_.base_url; }

  /// Request body for one call asking for `n` choices.
  static nlohmann::json request_body(const ChatRequest& request, int n);

 private:
  ChatResponse post_once(const ChatRequest& request, int n);

  HttpOptions options_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

// --- scripted mock -----------------------------------------------------------

struct MockRule {
  enum class Match { exact, contains, all_of, regex };
  Match match = Match::exact;
  /// One pattern for exact/contains/regex; every pattern must occur for all_of.
  std::vector<std::string> patterns;
  /// Replies served in order, one per sample, cycling when exhausted.
  std::vector<std::string> responses;
  /// Pick each reply uniformly at random (seeded) instead of cycling.
  bool random = false;
  std::int64_t latency_ms = 0;
};

/// Scripted responses keyed on the last user message. Exact rules are tried
/// first, then the remaining rules in file order, then the default.
///
/// JSON form:
///
///     {"seed": 7,
///      "default": "...",
///      "rules": [{"match": "exact|contains|all_of|regex",
///                 "pattern": "..." | ["...", "..."],
///                 "response": "..." | "responses": ["...", ...],
///                 "random": false, "latency_ms": 0}]}
struct MockScript {
  std::vector<MockRule> rules;
  std::optional<std::string> default_response;
  std::int64_t default_latency_ms = 0;
  std::uint64_t seed = 0;

  static MockScript from_json(const nlohmann::json& j);
  static MockScript load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

class MockBackend final : public ChatBackend {
 public:
  explicit MockBackend(MockScript script);
  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return "mock"; }

  /// Requests served so far.
  std::size_t call_count() const;

 private:
  std::optional<std::size_t> find_rule(const std::string& message) const;

  MockScript script_;
  mutable std::mutex mutex_;
  std::vector<std::size_t> cursors_;
  std::mt19937_64 rng_;
  std::size_t calls_ = 0;
};

// --- cassettes ---------------------------------------------------------------

/// One cassette line: {"digest", "request", "response"}.
struct CassetteEntry {
  std::string digest;
  ChatRequest request;
  ChatResponse response;
};

std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path);

/// Serves recorded responses by request digest. Never touches the network.
class ReplayBackend final : public ChatBackend {
 public:
  explicit ReplayBackend(const std::filesystem::path& cassette);
  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return "replay"; }
  std::size_t size() const noexcept { return responses_.size(); }

 private:
  std::map<std::string, ChatResponse> responses_;
};

/// Forwards to `inner` and appends each exchange to the cassette. Appends
/// take an exclusive file lock.
class RecordingBackend final : public ChatBackend {
 public:
  RecordingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path cassette);
  ChatResponse complete(const ChatRequest& request) override;
  std::string name() const override { return "record:" + inner_->name(); }

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::filesystem::path cassette_;
  std::mutex mutex_;
};

// --- client ------------------------------------------------------------------

struct SamplingDefaults {
  std::string model_id = "default";
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 512;
};

/// A backend bound to a role, with ledger accounting. Cheap to copy.
class ModelClient {
 public:
  ModelClient() = default;
  ModelClient(std::shared_ptr<ChatBackend> backend, ModelRole role, std::shared_ptr<CallLedger> ledger = nullptr,
              SamplingDefaults defaults = {});

  bool available() const noexcept { return backend_ != nullptr; }
  ModelRole role() const noexcept { return role_; }
  const SamplingDefaults& defaults() const noexcept { return defaults_; }
  const std::shared_ptr<CallLedger>& ledger() const noexcept { return ledger_; }

  /// Request pre-filled with the client's defaults.
  ChatRequest make_request(std::vector<ChatMessage> messages, int n_samples = 1) const;

  /// Sends the request and records it in the ledger. Throws
  /// BackendUnavailable when no backend is configured.
  ChatResponse complete(const ChatRequest& request) const;

 private:
  std::shared_ptr<ChatBackend> backend_;
  ModelRole role_ = ModelRole::policy;
  std::shared_ptr<CallLedger> ledger_;
  SamplingDefaults defaults_;
};

}  // namespace wma
