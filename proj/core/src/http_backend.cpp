#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "wma/error.hpp"
#include "wma/gateway.hpp"

namespace wma {

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base_url", "expected scheme://host[:port][/path]");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("base_url", "unsupported scheme '" + scheme + "'");
  const std::size_t path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  parsed.scheme_host_port = url.substr(0, path_start);
  parsed.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!parsed.path.empty() && parsed.path.back() == '/') parsed.path.pop_back();
  return parsed;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(HttpOptions options) : options_(std::move(options)) {
  const ParsedUrl parsed = split_url(options_.base_url);
  scheme_host_port_ = parsed.scheme_host_port;
  path_prefix_ = parsed.path;
}

nlohmann::json HttpBackend::request_body(const ChatRequest& request, int n) {
  nlohmann::json messages = nlohmann::json::array();
  for (const ChatMessage& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  nlohmann::json body = {{"model", request.model_id},       {"messages", messages},
                         {"temperature", request.temperature}, {"top_p", request.top_p},
                         {"n", n},                           {"max_tokens", request.max_tokens}};
  if (request.seed_hint) body["seed"] = *request.seed_hint;
  return body;
}

ChatResponse HttpBackend::post_once(const ChatRequest& request, int n) {
  const std::string body = request_body(request, n).dump();
  httplib::Headers headers;
  if (!options_.api_key_env.empty()) {
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  for (int attempt = 0;; ++attempt) {
    if (network::forbidden()) throw NetworkForbidden("network access is disabled for this process");
    network::detail::note_attempt();

    httplib::Client client(scheme_host_port_);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    const auto started = std::chrono::steady_clock::now();
    const httplib::Result result =
        client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);

    const bool last = attempt >= options_.retries;
    if (!result) {
      if (last) {
        if (result.error() == httplib::Error::Read || result.error() == httplib::Error::Write ||
            result.error() == httplib::Error::ConnectionTimeout) {
          throw Timeout("request to " + scheme_host_port_ + " timed out");
        }
        throw BackendUnavailable("request to " + scheme_host_port_ + " failed: " + httplib::to_string(result.error()));
      }
    } else if (result->status >= 200 && result->status < 300) {
      ChatResponse response;
      response.backend = name();
      response.latency_ms = elapsed.count();
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(result->body);
        for (const auto& choice : j.at("choices")) {
          response.choices.push_back(choice.at("message").at("content").get<std::string>());
        }
        if (j.contains("usage")) {
          response.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
          response.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
        }
      } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("malformed completion body: ") + e.what());
      }
      if (response.choices.empty()) throw EmptyResponse("completion carried no choices");
      return response;
    } else if (!retryable_status(result->status) || last) {
      throw HttpError(result->status, result->body);
    }
    std::this_thread::sleep_for(options_.backoff * (1 << attempt));
  }
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
  request.validate();
  if (options_.native_n || request.n_samples == 1) return post_once(request, request.n_samples);

  ChatResponse merged;
  merged.backend = name();
  for (int i = 0; i < request.n_samples; ++i) {
    ChatResponse one = post_once(request, 1);
    merged.choices.insert(merged.choices.end(), one.choices.begin(), one.choices.end());
    // The prompt is billed once per call when n is emulated.
    merged.usage.prompt_tokens += one.usage.prompt_tokens;
    merged.usage.completion_tokens += one.usage.completion_tokens;
    merged.latency_ms += one.latency_ms;
  }
  return merged;
}

}  // namespace wma
