#pragma once

// Helper-LLM boundary: candidate summarization and synthetic text generation.

#include <cstdint>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "sasc/jsonl_store.hpp"

namespace sasc {

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  virtual std::string id() const = 0;
  virtual std::string model() const = 0;

  // One sampled completion. Throws BackendError on failure.
  virtual std::string complete(const std::string& prompt, std::uint64_t seed,
                               double temperature) const = 0;

  // Local backends are pure and bypass the in-flight limit.
  virtual bool is_local() const { return false; }
};

struct LlmOptions {
  double temperature = 0.7;
  std::size_t max_inflight = 2;
};

struct LlmCounters {
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;

  LlmCounters& operator+=(const LlmCounters& o) {
    backend_calls += o.backend_calls;
    cache_hits += o.cache_hits;
    return *this;
  }
};

// Backend plus response cache keyed by (backend id, model, prompt version,
// prompt hash, seed, temperature). Safe for concurrent use.
class LlmClient {
 public:
  explicit LlmClient(std::shared_ptr<const LlmBackend> backend,
                     std::shared_ptr<JsonlStore> cache = nullptr, LlmOptions options = {});

  std::string complete(const std::string& prompt, std::uint64_t seed,
                       LlmCounters* counters = nullptr) const;

  std::string cache_key(const std::string& prompt, std::uint64_t seed) const;

  const LlmBackend& backend() const { return *backend_; }
  const LlmOptions& options() const { return options_; }

  static constexpr const char* kCacheFile = "llm.jsonl";

 private:
  std::shared_ptr<const LlmBackend> backend_;
  std::shared_ptr<JsonlStore> cache_;
  LlmOptions options_;
  std::shared_ptr<std::counting_semaphore<>> inflight_;
};

// Splits on newlines, strips bullet markers ("-", "*", "•", "1.", "1)") and
// surrounding quotes, lowercases, collapses whitespace, drops empty lines.
std::vector<std::string> parse_llm_output(std::string_view raw);

// Issues num_candidates sampled completions of the summarization prompt and
// returns the deduplicated candidates in first-seen order (at most
// num_candidates). Throws EmptyCompletion if nothing usable comes back.
std::vector<std::string> summarize_candidates(const LlmClient& client,
                                              const std::vector<std::string>& ngrams,
                                              std::size_t num_candidates, std::uint64_t seed,
                                              LlmCounters* counters = nullptr);

// Exactly `count` sentences related to the explanation, requested in batches
// of ten. Up to three extra batches are tried before InsufficientGenerations.
std::vector<std::string> generate_synthetic(const LlmClient& client,
                                            const std::string& explanation, std::size_t count,
                                            std::uint64_t seed, LlmCounters* counters = nullptr);

}  // namespace sasc
