#pragma once

#include <string>

#include "sasc/llm.hpp"

namespace sasc {

struct OpenAiOptions {
  std::string endpoint = "https://api.openai.com";
  std::string model = "gpt-3.5-turbo-instruct";
  bool chat = false;            // /v1/chat/completions instead of /v1/completions
  int max_tokens = 256;
  std::string api_key;          // falls back to $SASC_LLM_API_KEY when empty
  int retries = 3;
  double backoff_base_s = 0.5;
  double timeout_s = 120.0;
};

// OpenAI-compatible HTTP completion backend.
class OpenAiBackend final : public LlmBackend {
 public:
  explicit OpenAiBackend(OpenAiOptions options);

  std::string id() const override;
  std::string model() const override { return options_.model; }
  std::string complete(const std::string& prompt, std::uint64_t seed,
                       double temperature) const override;

  const OpenAiOptions& options() const { return options_; }

 private:
  OpenAiOptions options_;
};

}  // namespace sasc
