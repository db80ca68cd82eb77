#include "wma/gateway.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include "wma/digest.hpp"
#include "wma/error.hpp"

namespace wma {

// --- chat types --------------------------------------------------------------

void ChatRequest::validate() const {
  if (messages.empty()) throw InvalidArgument("chat request has no messages");
  for (const ChatMessage& m : messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      throw InvalidArgument("unknown chat role '" + m.role + "'");
    }
  }
  if (!(temperature >= 0)) throw InvalidArgument("temperature must be >= 0");
  if (!(top_p > 0 && top_p <= 1)) throw InvalidArgument("top_p must lie in (0, 1]");
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  if (max_tokens < 1) throw InvalidArgument("max_tokens must be > 0");
}

const std::string& ChatRequest::last_user_message() const {
  static const std::string kEmpty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return kEmpty;
}

nlohmann::json canonical_request_json(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const ChatMessage& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model_id", request.model_id}, {"messages", messages},       {"temperature", request.temperature},
          {"top_p", request.top_p},       {"n_samples", request.n_samples}, {"max_tokens", request.max_tokens}};
}

std::string request_digest(const ChatRequest& request) { return sha256_hex(canonical_request_json(request).dump()); }

nlohmann::json to_json(const ChatRequest& request) {
  nlohmann::json j = canonical_request_json(request);
  if (request.seed_hint) j["seed_hint"] = *request.seed_hint;
  return j;
}

ChatRequest chat_request_from_json(const nlohmann::json& j) {
  ChatRequest request;
  request.model_id = j.at("model_id").get<std::string>();
  for (const auto& m : j.at("messages")) {
    request.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  }
  request.temperature = j.at("temperature").get<double>();
  request.top_p = j.at("top_p").get<double>();
  request.n_samples = j.at("n_samples").get<int>();
  request.max_tokens = j.at("max_tokens").get<int>();
  if (j.contains("seed_hint")) request.seed_hint = j.at("seed_hint").get<std::uint64_t>();
  return request;
}

nlohmann::json to_json(const ChatResponse& response) {
  return {{"choices", response.choices},
          {"usage", {{"prompt_tokens", response.usage.prompt_tokens},
                     {"completion_tokens", response.usage.completion_tokens}}},
          {"latency_ms", response.latency_ms},
          {"backend", response.backend}};
}

ChatResponse chat_response_from_json(const nlohmann::json& j) {
  ChatResponse response;
  response.choices = j.at("choices").get<std::vector<std::string>>();
  response.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<std::int64_t>();
  response.usage.completion_tokens = j.at("usage").at("completion_tokens").get<std::int64_t>();
  response.latency_ms = j.value("latency_ms", std::int64_t{0});
  response.backend = j.value("backend", std::string{});
  return response;
}

std::int64_t count_tokens(const std::string& text) {
  std::int64_t tokens = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_token) ++tokens;
    in_token = !space;
  }
  return tokens;
}

// --- network policy ----------------------------------------------------------

namespace network {
namespace {
std::atomic<bool> g_forbidden{false};
std::atomic<std::size_t> g_attempts{0};
}  // namespace

void set_forbidden(bool forbidden) noexcept { g_forbidden.store(forbidden); }
bool forbidden() noexcept { return g_forbidden.load(); }
std::size_t attempts() noexcept { return g_attempts.load(); }
void reset_attempts() noexcept { g_attempts.store(0); }

namespace detail {
void note_attempt() { g_attempts.fetch_add(1); }
}  // namespace detail
}  // namespace network

// --- mock --------------------------------------------------------------------

namespace {

MockRule::Match match_from_string(const std::string& s, const std::string& path) {
  if (s == "exact") return MockRule::Match::exact;
  if (s == "contains") return MockRule::Match::contains;
  if (s == "all_of") return MockRule::Match::all_of;
  if (s == "regex") return MockRule::Match::regex;
  throw ConfigError(path, "unknown match kind '" + s + "'");
}

std::string match_to_string(MockRule::Match m) {
  switch (m) {
    case MockRule::Match::exact: return "exact";
    case MockRule::Match::contains: return "contains";
    case MockRule::Match::all_of: return "all_of";
    case MockRule::Match::regex: return "regex";
  }
  return "exact";
}

bool rule_matches(const MockRule& rule, const std::string& message) {
  switch (rule.match) {
    case MockRule::Match::exact:
      return message == rule.patterns.front();
    case MockRule::Match::contains:
      return message.find(rule.patterns.front()) != std::string::npos;
    case MockRule::Match::all_of:
      return std::all_of(rule.patterns.begin(), rule.patterns.end(),
                         [&](const std::string& p) { return message.find(p) != std::string::npos; });
    case MockRule::Match::regex:
      return std::regex_search(message, std::regex(rule.patterns.front()));
  }
  return false;
}

}  // namespace

MockScript MockScript::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("", "mock script must be an object");
  MockScript script;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      script.seed = value.get<std::uint64_t>();
    } else if (key == "default") {
      script.default_response = value.get<std::string>();
    } else if (key == "default_latency_ms") {
      script.default_latency_ms = value.get<std::int64_t>();
    } else if (key == "rules") {
      if (!value.is_array()) throw ConfigError("/rules", "expected an array");
    } else {
      throw ConfigError("/" + key, "unknown key");
    }
  }
  if (!j.contains("rules")) return script;
  const auto& rules = j.at("rules");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const std::string path = "/rules/" + std::to_string(i);
    const auto& r = rules[i];
    if (!r.is_object()) throw ConfigError(path, "expected an object");
    MockRule rule;
    for (const auto& [key, value] : r.items()) {
      if (key == "match") {
        rule.match = match_from_string(value.get<std::string>(), path + "/match");
      } else if (key == "pattern") {
        rule.patterns = value.is_array() ? value.get<std::vector<std::string>>()
                                         : std::vector<std::string>{value.get<std::string>()};
      } else if (key == "response") {
        rule.responses = {value.get<std::string>()};
      } else if (key == "responses") {
        rule.responses = value.get<std::vector<std::string>>();
      } else if (key == "random") {
        rule.random = value.get<bool>();
      } else if (key == "latency_ms") {
        rule.latency_ms = value.get<std::int64_t>();
      } else {
        throw ConfigError(path + "/" + key, "unknown key");
      }
    }
    if (rule.patterns.empty()) throw ConfigError(path + "/pattern", "missing pattern");
    if (rule.patterns.size() > 1 && rule.match != MockRule::Match::all_of) {
      throw ConfigError(path + "/pattern", "only all_of rules take several patterns");
    }
    if (rule.responses.empty()) throw ConfigError(path + "/response", "missing response");
    if (rule.match == MockRule::Match::regex) {
      try {
        std::regex check(rule.patterns.front());
      } catch (const std::regex_error& e) {
        throw ConfigError(path + "/pattern", std::string("invalid regex: ") + e.what());
      }
    }
    script.rules.push_back(std::move(rule));
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open mock script");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string(), e.what());
  }
  return from_json(j);
}

nlohmann::json MockScript::to_json() const {
  nlohmann::json rules_json = nlohmann::json::array();
  for (const MockRule& rule : rules) {
    nlohmann::json r = {{"match", match_to_string(rule.match)}};
    if (rule.patterns.size() == 1 && rule.match != MockRule::Match::all_of) {
      r["pattern"] = rule.patterns.front();
    } else {
      r["pattern"] = rule.patterns;
    }
    if (rule.responses.size() == 1) {
      r["response"] = rule.responses.front();
    } else {
      r["responses"] = rule.responses;
    }
    if (rule.random) r["random"] = true;
    if (rule.latency_ms != 0) r["latency_ms"] = rule.latency_ms;
    rules_json.push_back(std::move(r));
  }
  nlohmann::json j = {{"seed", seed}, {"rules", rules_json}};
  if (default_response) j["default"] = *default_response;
  if (default_latency_ms != 0) j["default_latency_ms"] = default_latency_ms;
  return j;
}

MockBackend::MockBackend(MockScript script)
    : script_(std::move(script)), cursors_(script_.rules.size(), 0), rng_(script_.seed) {}

std::optional<std::size_t> MockBackend::find_rule(const std::string& message) const {
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    if (script_.rules[i].match == MockRule::Match::exact && rule_matches(script_.rules[i], message)) return i;
  }
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    if (script_.rules[i].match != MockRule::Match::exact && rule_matches(script_.rules[i], message)) return i;
  }
  return std::nullopt;
}

ChatResponse MockBackend::complete(const ChatRequest& request) {
  request.validate();
  const std::string& message = request.last_user_message();
  const auto rule_index = find_rule(message);
  if (!rule_index && !script_.default_response) {
    const std::string head = message.substr(0, std::min<std::size_t>(message.size(), 120));
    throw ScriptMiss("no mock rule matches '" + head + "' and the script has no default");
  }

  ChatResponse response;
  response.backend = name();
  std::lock_guard lock(mutex_);
  ++calls_;
  for (int s = 0; s < request.n_samples; ++s) {
    if (!rule_index) {
      response.choices.push_back(*script_.default_response);
      response.latency_ms += script_.default_latency_ms;
      continue;
    }
    const MockRule& rule = script_.rules[*rule_index];
    std::size_t pick = 0;
    if (rule.random) {
      pick = static_cast<std::size_t>(rng_() % rule.responses.size());
    } else {
      pick = cursors_[*rule_index]++ % rule.responses.size();
    }
    response.choices.push_back(rule.responses[pick]);
    response.latency_ms += rule.latency_ms;
  }
  for (const ChatMessage& m : request.messages) response.usage.prompt_tokens += count_tokens(m.content);
  for (const std::string& c : response.choices) response.usage.completion_tokens += count_tokens(c);
  return response;
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

// --- cassettes ---------------------------------------------------------------

std::vector<CassetteEntry> load_cassette(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open cassette");
  std::vector<CassetteEntry> entries;
  std::size_t line_number = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_number;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      entries.push_back({j.at("digest").get<std::string>(), chat_request_from_json(j.at("request")),
                         chat_response_from_json(j.at("response"))});
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_number), e.what());
    }
  }
  return entries;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& cassette) {
  for (CassetteEntry& entry : load_cassette(cassette)) responses_.emplace(entry.digest, std::move(entry.response));
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
  request.validate();
  const std::string digest = request_digest(request);
  const auto it = responses_.find(digest);
  if (it == responses_.end()) throw CassetteMiss("no recorded response for request digest " + digest);
  return it->second;
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path cassette)
    : inner_(std::move(inner)), cassette_(std::move(cassette)) {
  if (!inner_) throw InvalidArgument("recording backend needs an inner backend");
  if (cassette_.has_parent_path()) std::filesystem::create_directories(cassette_.parent_path());
}

ChatResponse RecordingBackend::complete(const ChatRequest& request) {
  ChatResponse response = inner_->complete(request);
  const nlohmann::json line = {
      {"digest", request_digest(request)}, {"request", to_json(request)}, {"response", to_json(response)}};
  const std::string text = line.dump() + "\n";

  std::lock_guard lock(mutex_);
  const int fd = ::open(cassette_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error("cannot open cassette '" + cassette_.string() + "' for append");
  ::flock(fd, LOCK_EX);
  std::size_t written = 0;
  while (written < text.size()) {
    const ssize_t n = ::write(fd, text.data() + written, text.size() - written);
    if (n <= 0) break;
    written += static_cast<std::size_t>(n);
  }
  ::flock(fd, LOCK_UN);
  ::close(fd);
  if (written != text.size()) throw Error("short write to cassette '" + cassette_.string() + "'");
  return response;
}

// --- client ------------------------------------------------------------------

ModelClient::ModelClient(std::shared_ptr<ChatBackend> backend, ModelRole role, std::shared_ptr<CallLedger> ledger,
                         SamplingDefaults defaults)
    : backend_(std::move(backend)), role_(role), ledger_(std::move(ledger)), defaults_(std::move(defaults)) {}

ChatRequest ModelClient::make_request(std::vector<ChatMessage> messages, int n_samples) const {
  ChatRequest request;
  request.model_id = defaults_.model_id;
  request.messages = std::move(messages);
  request.temperature = defaults_.temperature;
  request.top_p = defaults_.top_p;
  request.max_tokens = defaults_.max_tokens;
  request.n_samples = n_samples;
  return request;
}

ChatResponse ModelClient::complete(const ChatRequest& request) const {
  if (!backend_) throw BackendUnavailable(std::string("no backend configured for role ") + std::string(to_string(role_)));
  request.validate();
  ChatResponse response = backend_->complete(request);
  if (ledger_) {
    ledger_->record({role_, response.usage.prompt_tokens, response.usage.completion_tokens, response.latency_ms});
  }
  return response;
}

}  // namespace wma
