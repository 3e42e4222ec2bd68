#pragma once

// Black-box text modules: functions mapping text to one real value.
//
// A ModuleHandle pairs a module with an optional noise wrapper. Noise is only
// meant for Step-1 ranking; `clean()` strips it and is what scoring uses.

#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace sasc {

struct CorpusIndex;
class ResponseCache;

enum class ModuleKind { LexicalSynthetic, RemoteHttp, Constant, Affine };

std::string to_string(ModuleKind kind);

class TextModule {
 public:
  virtual ~TextModule() = default;

  // Stable identity. Two modules with the same id must score identically.
  virtual const std::string& id() const = 0;
  virtual ModuleKind kind() const = 0;
  virtual nlohmann::json descriptor() const = 0;

  // values[i] = f(texts[i]).
  virtual std::vector<double> evaluate(std::span<const std::string> texts) const = 0;
};

struct NoiseSpec {
  double sd_in_sigma_f = 0.0;
  double sd = 0.0;              // absolute, = sd_in_sigma_f * sigma_f
  std::uint64_t seed = 0;
};

class ModuleHandle {
 public:
  ModuleHandle() = default;
  explicit ModuleHandle(std::shared_ptr<const TextModule> module,
                        std::optional<NoiseSpec> noise = std::nullopt)
      : module_(std::move(module)), noise_(noise) {}

  const TextModule& module() const { return *module_; }
  const std::shared_ptr<const TextModule>& shared() const { return module_; }
  const std::string& module_id() const { return module_->id(); }
  ModuleKind kind() const { return module_->kind(); }
  const std::optional<NoiseSpec>& noise() const noexcept { return noise_; }
  bool noisy() const noexcept { return noise_.has_value(); }

  ModuleHandle clean() const { return ModuleHandle(module_); }

  explicit operator bool() const noexcept { return module_ != nullptr; }

 private:
  std::shared_ptr<const TextModule> module_;
  std::optional<NoiseSpec> noise_;
};

struct ResponseStats {
  double mean = 0.0;
  double sigma_f = 0.0;         // population standard deviation
  std::size_t n = 0;
  std::string corpus_fingerprint;
};

// Per-caller accounting of where scores came from.
struct CallCounters {
  std::size_t backend_texts = 0;     // texts actually sent to a module backend
  std::size_t backend_requests = 0;  // evaluate() invocations
  std::size_t cache_hits = 0;

  CallCounters& operator+=(const CallCounters& o) {
    backend_texts += o.backend_texts;
    backend_requests += o.backend_requests;
    cache_hits += o.cache_hits;
    return *this;
  }
};

// Response = matched tokens / total tokens of the normalized text, in [0, 1].
ModuleHandle make_lexical_module(const std::string& keyphrase,
                                 const std::vector<std::string>& synonyms = {});

ModuleHandle make_constant_module(double value);

// a * f + b. Used to check that scores are invariant to affine rescaling.
ModuleHandle make_affine_module(const ModuleHandle& base, double a, double b);

// Wraps `module` with seeded Gaussian noise of sd noise_sd_in_sigma_f * sigma_f.
// The noise for a text depends only on (seed, text), so repeated calls agree.
// Throws DegenerateModule if stats.sigma_f is zero.
ModuleHandle inject_noise(const ModuleHandle& module, double noise_sd_in_sigma_f,
                          std::uint64_t seed, const ResponseStats& stats);

double noise_draw(const NoiseSpec& spec, const std::string& text);

// Scores texts through the shared response cache. Cached values are returned
// without touching the backend; non-finite backend values throw
// NonFiniteResponse. Safe for concurrent callers.
class ModuleScorer {
 public:
  explicit ModuleScorer(std::shared_ptr<ResponseCache> cache);

  std::vector<double> score_texts(const ModuleHandle& module,
                                  std::span<const std::string> texts,
                                  CallCounters* counters = nullptr) const;

  // Mean and population sd of the clean module over every unique ngram.
  // Persisted next to the cache under (module_id, corpus fingerprint).
  // Throws DegenerateModule if sigma_f == 0.
  ResponseStats compute_stats(const ModuleHandle& module, const CorpusIndex& index,
                              CallCounters* counters = nullptr) const;

  ResponseCache& cache() const { return *cache_; }

 private:
  std::shared_ptr<ResponseCache> cache_;
};

}  // namespace sasc
