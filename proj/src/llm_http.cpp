#include "sasc/llm_http.hpp"

#include <httplib.h>

#include <cstdlib>
#include <nlohmann/json.hpp>

#include "http_util.hpp"
#include "sasc/errors.hpp"

namespace sasc {

using nlohmann::json;

OpenAiBackend::OpenAiBackend(OpenAiOptions options) : options_(std::move(options)) {
  if (options_.api_key.empty()) {
    if (const char* key = std::getenv("SASC_LLM_API_KEY")) options_.api_key = key;
  }
  detail::split_url(options_.endpoint);  // validates
}

std::string OpenAiBackend::id() const {
  return "openai-http:" + options_.endpoint + (options_.chat ? "#chat" : "#completions");
}

std::string OpenAiBackend::complete(const std::string& prompt, std::uint64_t seed,
                                    double temperature) const {
  const auto url = detail::split_url(options_.endpoint);
  json body{{"model", options_.model},
            {"temperature", temperature},
            {"max_tokens", options_.max_tokens},
            {"seed", seed % (1ULL << 53)}};
  std::string path = url.prefix;
  if (options_.chat) {
    path += "/v1/chat/completions";
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  } else {
    path += "/v1/completions";
    body["prompt"] = prompt;
  }
  const auto payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) detail::backoff_sleep(options_.backoff_base_s, attempt - 1);
    httplib::Client cli(url.origin);
    const auto secs = static_cast<time_t>(options_.timeout_s);
    cli.set_connection_timeout(secs);
    cli.set_read_timeout(secs);
    if (!options_.api_key.empty()) cli.set_bearer_token_auth(options_.api_key);
    auto res = cli.Post(path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw BackendError("LLM endpoint returned HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 512));
    try {
      const auto doc = json::parse(res->body);
      const auto& choice = doc.at("choices").at(0);
      if (options_.chat) return choice.at("message").at("content").get<std::string>();
      return choice.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw BackendError(std::string("malformed completion response: ") + e.what());
    }
  }
  throw BackendError("LLM endpoint " + options_.endpoint + " failed after " +
                     std::to_string(options_.retries) + " retries (" + last_error + ")");
}

}  // namespace sasc
