#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace wma {

struct ChatMessage {
  /// One of "system", "user", "assistant".
  std::string role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model_id = "default";
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  double top_p = 1.0;
  int n_samples = 1;
  int max_tokens = 512;
  std::optional<std::uint64_t> seed_hint;

  /// Throws InvalidArgument when the request violates its invariants.
  void validate() const;
  /// Content of the last user message, or "" when there is none.
  const std::string& last_user_message() const;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  bool operator==(const Usage&) const = default;
};

struct ChatResponse {
  std::vector<std::string> choices;
  Usage usage;
  std::int64_t latency_ms = 0;
  std::string backend;

  bool operator==(const ChatResponse&) const = default;
};

/// Canonical request JSON used for hashing: model_id, messages, temperature,
/// top_p, n_samples and max_tokens. seed_hint is deliberately left out so
/// recorded cassettes survive seed changes.
nlohmann::json canonical_request_json(const ChatRequest& request);

/// SHA-256 of the canonical request JSON.
std::string request_digest(const ChatRequest& request);

nlohmann::json to_json(const ChatRequest& request);
ChatRequest chat_request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ChatResponse& response);
ChatResponse chat_response_from_json(const nlohmann::json& j);

/// Whitespace token count; the token estimate used by offline backends.
std::int64_t count_tokens(const std::string& text);

}  // namespace wma
