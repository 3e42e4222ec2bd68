#pragma once

// Summarize-and-score explanation of a black-box text module.
//
// Step 1 ranks every unique corpus ngram by module response, samples from the
// top of the ranking and asks the helper LLM for candidate explanations.
// Step 2 generates related text for each candidate, pairs it with unrelated
// text, and scores the candidate by the mean response difference in units of
// the module's response sd over the corpus (sigma_f). The best-scoring
// candidate is returned.

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sasc/corpus.hpp"
#include "sasc/llm.hpp"
#include "sasc/module.hpp"

namespace sasc {

inline constexpr std::string_view kResultSchema = "explanation-result/1";

struct ExplainConfig {
  std::size_t ngram_order = 3;
  std::size_t top_pool = 50;
  std::size_t sample_size = 30;
  std::size_t num_candidates = 5;
  std::size_t synth_count = 20;     // half related, half unrelated
  std::uint64_t seed = 0;
  double noise_sd_in_sigma_f = 0.0; // applied to Step-1 ranking only

  // Throws ConfigError unless sample_size <= top_pool, synth_count is even
  // and >= 2, and every count is positive.
  void validate() const;

  nlohmann::json to_json() const;
  // Unknown keys throw ConfigError.
  static ExplainConfig from_json(const nlohmann::json& doc, ExplainConfig base);
  static ExplainConfig from_json(const nlohmann::json& doc);

  bool operator==(const ExplainConfig&) const = default;
};

struct RankedNgram {
  std::string text;
  double response = 0.0;

  bool operator==(const RankedNgram&) const = default;
};

struct CandidateExplanation {
  std::string text;
  std::vector<std::string> related;     // Text+
  std::vector<std::string> unrelated;   // Text-
  std::optional<double> raw_mean_diff;  // nullopt = unscored
  std::optional<double> score_sigma;    // raw_mean_diff / sigma_f
  std::size_t distractors_used = 0;

  bool scored() const noexcept { return score_sigma.has_value(); }
  bool operator==(const CandidateExplanation&) const = default;
};

struct StageTimings {
  double stats_ms = 0, rank_ms = 0, summarize_ms = 0, generate_ms = 0, score_ms = 0, total_ms = 0;
};

struct RunAudit {
  CallCounters module;
  LlmCounters llm;
  std::string prompt_version;
  std::string distractor_version;
  std::string summarize_prompt_hash;
  std::vector<std::string> generate_prompt_hashes;
  std::string failed_stage;   // empty on success
  std::string error;
};

struct ExplanationResult {
  std::string method;  // "sasc" or "baseline"
  std::string module_id;
  std::string corpus_fingerprint;
  std::string backend_id;
  std::optional<CandidateExplanation> selected;  // empty only in partial results
  std::vector<CandidateExplanation> candidates;
  std::vector<RankedNgram> top_ngrams_used;
  ResponseStats stats;
  ExplainConfig config;
  StageTimings timings;
  RunAudit audit;
  bool complete = false;
};

// Every unique ngram scored (through the cache) and sorted by descending
// response; ties keep index order. Throws DegenerateModule if all responses
// are equal.
std::vector<RankedNgram> rank_ngrams(const ModuleScorer& scorer, const ModuleHandle& module,
                                     const CorpusIndex& index, CallCounters* counters = nullptr);

// Uniform sample without replacement of min(sample_size, available) items from
// the first min(top_pool, available) entries, returned in ranking order.
std::vector<RankedNgram> sample_top(const std::vector<RankedNgram>& ranked, std::size_t top_pool,
                                    std::size_t sample_size, std::uint64_t seed);

// Mean response difference between related and unrelated text, raw and in
// sigma_f units. Always evaluates the clean (noise-free) module.
CandidateExplanation score_explanation(const ModuleScorer& scorer, const ModuleHandle& module,
                                       const std::string& explanation,
                                       const std::vector<std::string>& related,
                                       const std::vector<std::string>& unrelated,
                                       const ResponseStats& stats,
                                       CallCounters* counters = nullptr);

// Builds Text- for candidate `index`: sampled from the other candidates'
// related text, topped up from the distractor pool when short.
std::vector<std::string> assemble_unrelated(const std::vector<std::vector<std::string>>& related,
                                            std::size_t index, std::size_t count,
                                            std::uint64_t seed, std::size_t* distractors_used);

// On failure the exception propagates; when `partial` is given it holds the
// audit trail up to the failing stage.
ExplanationResult explain_module(const ModuleScorer& scorer, const ModuleHandle& module,
                                 const CorpusIndex& index, const LlmClient& llm,
                                 const ExplainConfig& config,
                                 ExplanationResult* partial = nullptr);

// Step 1 only: returns the first candidate, unscored.
ExplanationResult baseline_explain(const ModuleScorer& scorer, const ModuleHandle& module,
                                   const CorpusIndex& index, const LlmClient& llm,
                                   const ExplainConfig& config,
                                   ExplanationResult* partial = nullptr);

nlohmann::json to_json(const ExplanationResult& result);

// One-paragraph prose summary for terminals.
std::string describe(const ExplanationResult& result);

}  // namespace sasc
