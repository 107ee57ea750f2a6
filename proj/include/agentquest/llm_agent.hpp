#pragma once

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "agentquest/agents.hpp"

namespace agentquest {

inline constexpr std::string_view kApiBaseEnv = "AGENTQUEST_API_BASE";
inline constexpr std::string_view kApiKeyEnv = "AGENTQUEST_API_KEY";
inline constexpr std::string_view kLlmUnavailable = "<<LLM_UNAVAILABLE>>";

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  std::chrono::milliseconds delay_before(int retry) const {  // retry >= 1
    double ms = static_cast<double>(initial_backoff.count());
    for (int i = 1; i < retry; ++i) ms *= multiplier;
    return std::chrono::milliseconds(
        static_cast<long long>(std::min(ms, static_cast<double>(max_backoff.count()))));
  }
};

struct LlmOptions {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string model = "gpt-4";
  std::string system_prompt;
  std::chrono::seconds timeout{60};
  RetryPolicy retry;

};

/// Fills base_url/api_key from AGENTQUEST_API_BASE / AGENTQUEST_API_KEY when set.
inline LlmOptions options_from_env(LlmOptions opts) {
  if (const char* base = std::getenv(std::string(kApiBaseEnv).c_str()); base && *base) opts.base_url = base;
  if (const char* key = std::getenv(std::string(kApiKeyEnv).c_str()); key && *key) opts.api_key = key;
  return opts;
}

/// Chat-completions request body: system prompt, then alternating
/// observation (user) / action (assistant) turns, latest observation last.
inline nlohmann::json build_chat_request(std::string_view model, std::string_view system_prompt,
                                         std::string_view observation, std::span<const Exchange> history) {
  nlohmann::json messages = nlohmann::json::array();
  if (!system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", system_prompt}});
  for (const auto& ex : history) {
    messages.push_back({{"role", "user"}, {"content", ex.observation}});
    messages.push_back({{"role", "assistant"}, {"content", ex.action}});
  }
  messages.push_back({{"role", "user"}, {"content", observation}});
  return {{"model", model}, {"messages", std::move(messages)}};
}

/// choices[0].message.content, if present and a string.
inline std::optional<std::string> parse_chat_response(std::string_view body) {
  auto doc = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return std::nullopt;
  const auto ptr = nlohmann::json::json_pointer("/choices/0/message/content");
  if (!doc.contains(ptr) || !doc.at(ptr).is_string()) return std::nullopt;
  return doc.at(ptr).get<std::string>();
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // full request path
};

/// Splits the base URL and appends /chat/completions unless already present.
inline SplitUrl chat_completions_url(std::string_view base) {
  std::string url(base);
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("API base URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  constexpr std::string_view suffix = "/chat/completions";
  if (!out.path.ends_with(suffix)) out.path += suffix;
  return out;
}

/// Forwards the conversation to a chat-completions endpoint and returns the
/// reply verbatim. Stateless per call: the full history goes out every time.
class HttpLlmAgent final : public Agent {
 public:
  explicit HttpLlmAgent(LlmOptions options) : options_(std::move(options)) {
    url_ = chat_completions_url(options_.base_url);
  }

  std::string next_action(std::string_view observation, std::span<const Exchange> history) override {
    flags_ = {};
    const std::string body =
        build_chat_request(options_.model, options_.system_prompt, observation, history).dump();

    httplib::Client client(url_.origin);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
      if (attempt > 1) std::this_thread::sleep_for(options_.retry.delay_before(attempt - 1));
      ++requests_;
      auto res = client.Post(url_.path, headers, body, "application/json");
      if (!res) {
        last_error_ = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status < 200 || res->status >= 300) {
        last_error_ = "HTTP status " + std::to_string(res->status);
        continue;
      }
      if (auto content = parse_chat_response(res->body)) return *content;
      last_error_ = "malformed completion response";
    }
    flags_.aborted = true;
    return std::string(kLlmUnavailable);
  }

  StepFlags last_flags() const override { return flags_; }
  const std::string& last_error() const { return last_error_; }
  int requests() const { return requests_; }

 private:
  LlmOptions options_;
  SplitUrl url_;
  StepFlags flags_;
  std::string last_error_;
  int requests_ = 0;
};

}  // namespace agentquest
