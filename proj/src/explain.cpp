#include "sasc/explain.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <unordered_set>

#include "sasc/distractors.hpp"
#include "sasc/errors.hpp"
#include "sasc/hashing.hpp"
#include "sasc/prompts.hpp"
#include "sasc/rng.hpp"

namespace sasc {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// k distinct indices from [0, n), ascending.
std::vector<std::size_t> choose_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Shared Step 1. Fills result fields and returns the deduplicated candidates.
std::vector<std::string> run_step_one(const ModuleScorer& scorer, const ModuleHandle& module,
                                      const CorpusIndex& index, const LlmClient& llm,
                                      const ExplainConfig& config, ExplanationResult& r) {
  config.validate();
  if (index.ngram_order != config.ngram_order)
    throw ConfigError("index ngram order " + std::to_string(index.ngram_order) +
                      " does not match config ngram_order " + std::to_string(config.ngram_order));
  const auto clean = module.clean();
  r.module_id = clean.module_id();
  r.corpus_fingerprint = index.fingerprint;
  r.backend_id = llm.backend().id();
  r.config = config;
  r.audit.prompt_version = std::string(kPromptVersion);
  r.audit.distractor_version = std::string(kDistractorVersion);

  r.audit.failed_stage = "stats";
  auto t0 = Clock::now();
  r.stats = scorer.compute_stats(clean, index, &r.audit.module);
  r.timings.stats_ms = ms_since(t0);

  r.audit.failed_stage = "rank";
  t0 = Clock::now();
  const auto ranking_module =
      config.noise_sd_in_sigma_f > 0.0
          ? inject_noise(clean, config.noise_sd_in_sigma_f, derive_seed(config.seed, "noise"),
                         r.stats)
          : clean;
  const auto ranked = rank_ngrams(scorer, ranking_module, index, &r.audit.module);
  r.top_ngrams_used =
      sample_top(ranked, config.top_pool, config.sample_size, derive_seed(config.seed, "sample"));
  r.timings.rank_ms = ms_since(t0);

  r.audit.failed_stage = "summarize";
  t0 = Clock::now();
  std::vector<std::string> phrases;
  phrases.reserve(r.top_ngrams_used.size());
  for (const auto& n : r.top_ngrams_used) phrases.push_back(n.text);
  r.audit.summarize_prompt_hash = sha256_hex(render_summarize_prompt(phrases));
  const auto raw = summarize_candidates(llm, phrases, config.num_candidates,
                                        derive_seed(config.seed, "summarize"), &r.audit.llm);
  // Candidates equal after normalization are merged, first occurrence kept.
  std::vector<std::string> candidates;
  std::unordered_set<std::string> seen;
  for (const auto& c : raw) {
    if (seen.insert(normalize_text(c)).second) candidates.push_back(c);
  }
  r.timings.summarize_ms = ms_since(t0);
  return candidates;
}

}  // namespace

void ExplainConfig::validate() const {
  if (ngram_order == 0) throw ConfigError("ngram_order must be >= 1");
  if (top_pool == 0) throw ConfigError("top_pool must be >= 1");
  if (sample_size == 0) throw ConfigError("sample_size must be >= 1");
  if (sample_size > top_pool) throw ConfigError("sample_size must not exceed top_pool");
  if (num_candidates == 0) throw ConfigError("num_candidates must be >= 1");
  if (synth_count < 2 || synth_count % 2 != 0)
    throw ConfigError("synth_count must be even and >= 2");
  if (!(noise_sd_in_sigma_f >= 0.0)) throw ConfigError("noise_sd_in_sigma_f must be >= 0");
}

std::vector<RankedNgram> rank_ngrams(const ModuleScorer& scorer, const ModuleHandle& module,
                                     const CorpusIndex& index, CallCounters* counters) {
  if (index.empty()) throw EmptyCorpus("index has no ngrams");
  std::vector<std::string> texts;
  texts.reserve(index.size());
  for (const auto& e : index.entries) texts.push_back(e.text);
  const auto values = scorer.score_texts(module, texts, counters);

  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); }))
    throw DegenerateModule("all ngram responses are equal for " + module.module_id());

  std::vector<RankedNgram> ranked;
  ranked.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) ranked.push_back({std::move(texts[i]), values[i]});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedNgram& a, const RankedNgram& b) { return a.response > b.response; });
  return ranked;
}

std::vector<RankedNgram> sample_top(const std::vector<RankedNgram>& ranked, std::size_t top_pool,
                                    std::size_t sample_size, std::uint64_t seed) {
  const std::size_t pool = std::min(top_pool, ranked.size());
  Rng rng(seed);
  std::vector<RankedNgram> out;
  for (auto i : choose_indices(pool, sample_size, rng)) out.push_back(ranked[i]);
  return out;
}

CandidateExplanation score_explanation(const ModuleScorer& scorer, const ModuleHandle& module,
                                       const std::string& explanation,
                                       const std::vector<std::string>& related,
                                       const std::vector<std::string>& unrelated,
                                       const ResponseStats& stats, CallCounters* counters) {
  if (related.empty() || unrelated.empty())
    throw ConfigError("related and unrelated text must be non-empty");
  if (related.size() != unrelated.size())
    throw ConfigError("related and unrelated text must have equal length");
  if (!(stats.sigma_f > 0.0))
    throw DegenerateModule("sigma_f is zero; explanation scores are undefined");

  const auto clean = module.clean();
  const auto pos = scorer.score_texts(clean, related, counters);
  const auto neg = scorer.score_texts(clean, unrelated, counters);

  CandidateExplanation c;
  c.text = explanation;
  c.related = related;
  c.unrelated = unrelated;
  c.raw_mean_diff = mean_of(pos) - mean_of(neg);
  c.score_sigma = *c.raw_mean_diff / stats.sigma_f;
  return c;
}

std::vector<std::string> assemble_unrelated(const std::vector<std::vector<std::string>>& related,
                                            std::size_t index, std::size_t count,
                                            std::uint64_t seed, std::size_t* distractors_used) {
  const std::unordered_set<std::string> own(related[index].begin(), related[index].end());
  std::vector<std::string> pool;
  std::unordered_set<std::string> taken;
  for (std::size_t j = 0; j < related.size(); ++j) {
    if (j == index) continue;
    for (const auto& s : related[j]) {
      if (!own.count(s) && taken.insert(s).second) pool.push_back(s);
    }
  }

  Rng rng(seed);
  std::vector<std::string> out;
  for (auto i : choose_indices(pool.size(), count, rng)) out.push_back(pool[i]);

  std::size_t topped = 0;
  if (out.size() < count) {
    std::vector<std::string> extra;
    for (const auto& s : distractor_pool()) {
      if (!own.count(s) && !taken.count(s)) extra.push_back(s);
    }
    for (auto i : choose_indices(extra.size(), count - out.size(), rng)) {
      out.push_back(extra[i]);
      ++topped;
    }
  }
  if (out.size() < count)
    throw InsufficientGenerations("only " + std::to_string(out.size()) +
                                  " unrelated sentences available, need " + std::to_string(count));
  if (distractors_used) *distractors_used = topped;
  return out;
}

ExplanationResult explain_module(const ModuleScorer& scorer, const ModuleHandle& module,
                                 const CorpusIndex& index, const LlmClient& llm,
                                 const ExplainConfig& config, ExplanationResult* partial) {
  ExplanationResult local;
  ExplanationResult& r = partial ? *partial : local;
  r = ExplanationResult{};
  r.method = "sasc";
  const auto start = Clock::now();
  try {
    const auto candidates = run_step_one(scorer, module, index, llm, config, r);
    const std::size_t half = config.synth_count / 2;

    r.audit.failed_stage = "generate";
    auto t0 = Clock::now();
    std::vector<std::vector<std::string>> related;
    related.reserve(candidates.size());
    for (const auto& c : candidates) {
      r.audit.generate_prompt_hashes.push_back(sha256_hex(render_generate_prompt(c)));
      related.push_back(
          generate_synthetic(llm, c, half, derive_seed(config.seed, "generate:" + c), &r.audit.llm));
    }
    r.timings.generate_ms = ms_since(t0);

    r.audit.failed_stage = "score";
    t0 = Clock::now();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      std::size_t topped = 0;
      const auto unrelated =
          assemble_unrelated(related, i, half, derive_seed(config.seed, "unrelated", i), &topped);
      auto scored = score_explanation(scorer, module, candidates[i], related[i], unrelated,
                                      r.stats, &r.audit.module);
      scored.distractors_used = topped;
      r.candidates.push_back(std::move(scored));
    }
    r.timings.score_ms = ms_since(t0);

    std::size_t best = 0;
    for (std::size_t i = 1; i < r.candidates.size(); ++i) {
      if (*r.candidates[i].score_sigma > *r.candidates[best].score_sigma) best = i;
    }
    r.selected = r.candidates[best];
  } catch (const std::exception& e) {
    r.audit.error = e.what();
    r.timings.total_ms = ms_since(start);
    throw;
  }
  r.audit.failed_stage.clear();
  r.complete = true;
  r.timings.total_ms = ms_since(start);
  return r;
}

ExplanationResult baseline_explain(const ModuleScorer& scorer, const ModuleHandle& module,
                                   const CorpusIndex& index, const LlmClient& llm,
                                   const ExplainConfig& config, ExplanationResult* partial) {
  ExplanationResult local;
  ExplanationResult& r = partial ? *partial : local;
  r = ExplanationResult{};
  r.method = "baseline";
  const auto start = Clock::now();
  try {
    const auto candidates = run_step_one(scorer, module, index, llm, config, r);
    for (const auto& c : candidates) r.candidates.push_back(CandidateExplanation{c, {}, {}, {}, {}, 0});
    r.selected = r.candidates.front();
  } catch (const std::exception& e) {
    r.audit.error = e.what();
    r.timings.total_ms = ms_since(start);
    throw;
  }
  r.audit.failed_stage.clear();
  r.complete = true;
  r.timings.total_ms = ms_since(start);
  return r;
}

}  // namespace sasc
