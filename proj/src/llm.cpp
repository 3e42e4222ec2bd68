#include "sasc/llm.hpp"

#include <algorithm>
#include <span>
#include <unordered_set>

#include "sasc/corpus.hpp"
#include "sasc/errors.hpp"
#include "sasc/format.hpp"
#include "sasc/hashing.hpp"
#include "sasc/prompts.hpp"

namespace sasc {
namespace {

constexpr std::string_view kQuotes[] = {"\"", "'", "`", "“", "”", "‘", "’"};
constexpr std::string_view kBullets[] = {"-", "*", "•"};

bool starts_with_any(std::string_view s, std::string_view& which,
                     std::span<const std::string_view> set) {
  for (auto q : set) {
    if (s.substr(0, q.size()) == q) {
      which = q;
      return true;
    }
  }
  return false;
}

bool ends_with_any(std::string_view s, std::string_view& which,
                   std::span<const std::string_view> set) {
  for (auto q : set) {
    if (s.size() >= q.size() && s.substr(s.size() - q.size()) == q) {
      which = q;
      return true;
    }
  }
  return false;
}

// A marker only counts when followed by whitespace, a quote, or the end.
bool marker_boundary(std::string_view rest) {
  if (rest.empty() || rest.front() == ' ' || rest.front() == '\t') return true;
  std::string_view q;
  return starts_with_any(rest, q, kQuotes);
}

std::string strip_decorations(std::string s) {
  for (;;) {
    const std::string before = s;
    s = collapse_whitespace(s);
    std::string_view v = s;
    std::string_view m;
    if (starts_with_any(v, m, kBullets) && marker_boundary(v.substr(m.size()))) {
      s = std::string(v.substr(m.size()));
    } else {
      std::size_t digits = 0;
      while (digits < v.size() && v[digits] >= '0' && v[digits] <= '9') ++digits;
      if (digits > 0 && digits < v.size() && (v[digits] == '.' || v[digits] == ')') &&
          marker_boundary(v.substr(digits + 1))) {
        s = std::string(v.substr(digits + 1));
      }
    }
    s = collapse_whitespace(s);
    v = s;
    std::string_view open, close;
    if (v.size() >= 2 && starts_with_any(v, open, kQuotes) && ends_with_any(v, close, kQuotes) &&
        open.size() + close.size() <= v.size()) {
      s = collapse_whitespace(v.substr(open.size(), v.size() - open.size() - close.size()));
    }
    if (s == before) return s;
  }
}

std::string clean_candidate(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return s;
}

}  // namespace

LlmClient::LlmClient(std::shared_ptr<const LlmBackend> backend, std::shared_ptr<JsonlStore> cache,
                     LlmOptions options)
    : backend_(std::move(backend)),
      cache_(cache ? std::move(cache) : std::make_shared<JsonlStore>()),
      options_(options),
      inflight_(std::make_shared<std::counting_semaphore<>>(
          static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options.max_inflight)))) {
  if (!backend_) throw ConfigError("LLM backend must be set");
}

std::string LlmClient::cache_key(const std::string& prompt, std::uint64_t seed) const {
  return sha256_fields({"llm", backend_->id(), backend_->model(), kPromptVersion,
                        sha256_hex(prompt), std::to_string(seed),
                        format_double(options_.temperature)});
}

std::string LlmClient::complete(const std::string& prompt, std::uint64_t seed,
                                LlmCounters* counters) const {
  const auto key = cache_key(prompt, seed);
  if (auto hit = cache_->get(key); hit && hit->is_string()) {
    if (counters) ++counters->cache_hits;
    return hit->get<std::string>();
  }
  std::string text;
  if (backend_->is_local()) {
    text = backend_->complete(prompt, seed, options_.temperature);
  } else {
    inflight_->acquire();
    try {
      text = backend_->complete(prompt, seed, options_.temperature);
    } catch (...) {
      inflight_->release();
      throw;
    }
    inflight_->release();
  }
  if (counters) ++counters->backend_calls;
  cache_->put(key, text);
  // First writer wins when two callers race on the same key.
  auto stored = cache_->get(key);
  return stored && stored->is_string() ? stored->get<std::string>() : text;
}

std::vector<std::string> parse_llm_output(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    auto line = strip_decorations(lowercase(raw.substr(start, end - start)));
    if (!line.empty()) out.push_back(std::move(line));
    start = end + 1;
  }
  return out;
}

std::vector<std::string> summarize_candidates(const LlmClient& client,
                                              const std::vector<std::string>& ngrams,
                                              std::size_t num_candidates, std::uint64_t seed,
                                              LlmCounters* counters) {
  if (ngrams.empty()) throw ConfigError("summarize_candidates needs at least one ngram");
  if (num_candidates == 0) throw ConfigError("num_candidates must be >= 1");
  const auto prompt = render_summarize_prompt(ngrams);

  std::vector<std::string> candidates;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < num_candidates; ++i) {
    const auto raw = client.complete(prompt, derive_seed(seed, "summarize", i), counters);
    auto items = parse_llm_output(raw);
    if (items.empty()) {
      // Unparseable: keep the whole completion as one candidate.
      auto whole = collapse_whitespace(lowercase(raw));
      if (!whole.empty()) items.push_back(std::move(whole));
    }
    for (auto& item : items) {
      item = clean_candidate(std::move(item));
      if (!item.empty() && seen.insert(item).second) candidates.push_back(item);
    }
  }
  if (candidates.empty()) throw EmptyCompletion("every summarization completion was empty");
  if (candidates.size() > num_candidates) candidates.resize(num_candidates);
  return candidates;
}

std::vector<std::string> generate_synthetic(const LlmClient& client,
                                            const std::string& explanation, std::size_t count,
                                            std::uint64_t seed, LlmCounters* counters) {
  if (collapse_whitespace(explanation).empty()) throw ConfigError("explanation must be non-empty");
  if (count == 0) throw ConfigError("count must be >= 1");
  const auto prompt = render_generate_prompt(explanation);
  const std::size_t planned = (count + kGenerationBatch - 1) / kGenerationBatch;
  constexpr std::size_t kExtraBatches = 3;

  std::vector<std::string> out;
  for (std::size_t b = 0; out.size() < count && b < planned + kExtraBatches; ++b) {
    const auto raw = client.complete(prompt, derive_seed(seed, "generate", b), counters);
    for (auto& s : parse_llm_output(raw)) out.push_back(std::move(s));
  }
  if (out.size() < count)
    throw InsufficientGenerations("got " + std::to_string(out.size()) + " of " +
                                  std::to_string(count) + " sentences for \"" + explanation + "\"");
  out.resize(count);
  return out;
}

}  // namespace sasc
