#include <set>
#include <sstream>

#include "sasc/errors.hpp"
#include "sasc/explain.hpp"
#include "sasc/format.hpp"

namespace sasc {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json candidate_json(const CandidateExplanation& c) {
  return {{"text", c.text},
          {"related_texts", c.related},
          {"unrelated_texts", c.unrelated},
          {"raw_mean_diff", optional_number(c.raw_mean_diff)},
          {"score_sigma", optional_number(c.score_sigma)},
          {"scored", c.scored()},
          {"distractors_used", c.distractors_used}};
}

}  // namespace

json ExplainConfig::to_json() const {
  return {{"ngram_order", ngram_order},   {"top_pool", top_pool},
          {"sample_size", sample_size},   {"num_candidates", num_candidates},
          {"synth_count", synth_count},   {"seed", seed},
          {"noise_sd_in_sigma_f", noise_sd_in_sigma_f}};
}

ExplainConfig ExplainConfig::from_json(const json& doc) { return from_json(doc, ExplainConfig{}); }

ExplainConfig ExplainConfig::from_json(const json& doc, ExplainConfig c) {
  static const std::set<std::string> kKeys = {"ngram_order", "top_pool",    "sample_size",
                                              "num_candidates", "synth_count", "seed",
                                              "noise_sd_in_sigma_f"};
  if (!doc.is_object()) throw ConfigError("explain config must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    if (!kKeys.count(k)) throw ConfigError("unknown config key: " + k);
  }
  try {
    c.ngram_order = doc.value("ngram_order", c.ngram_order);
    c.top_pool = doc.value("top_pool", c.top_pool);
    c.sample_size = doc.value("sample_size", c.sample_size);
    c.num_candidates = doc.value("num_candidates", c.num_candidates);
    c.synth_count = doc.value("synth_count", c.synth_count);
    c.seed = doc.value("seed", c.seed);
    c.noise_sd_in_sigma_f = doc.value("noise_sd_in_sigma_f", c.noise_sd_in_sigma_f);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

json to_json(const ExplanationResult& r) {
  json candidates = json::array();
  for (const auto& c : r.candidates) candidates.push_back(candidate_json(c));
  json top = json::array();
  for (const auto& n : r.top_ngrams_used) top.push_back({{"text", n.text}, {"response", n.response}});

  const auto& m = r.audit.module;
  const std::size_t module_lookups = m.backend_texts + m.cache_hits;
  const std::size_t llm_lookups = r.audit.llm.backend_calls + r.audit.llm.cache_hits;
  return {
      {"schema_version", std::string(kResultSchema)},
      {"method", r.method},
      {"complete", r.complete},
      {"module_id", r.module_id},
      {"corpus_fingerprint", r.corpus_fingerprint},
      {"backend_id", r.backend_id},
      {"seed", r.config.seed},
      {"config", r.config.to_json()},
      {"stats",
       {{"mean", r.stats.mean},
        {"sigma_f", r.stats.sigma_f},
        {"n", r.stats.n},
        {"corpus_fingerprint", r.stats.corpus_fingerprint}}},
      {"selected", r.selected ? candidate_json(*r.selected) : json(nullptr)},
      {"candidates", std::move(candidates)},
      {"top_ngrams_used", std::move(top)},
      {"timings_ms",
       {{"stats", r.timings.stats_ms},
        {"rank", r.timings.rank_ms},
        {"summarize", r.timings.summarize_ms},
        {"generate", r.timings.generate_ms},
        {"score", r.timings.score_ms},
        {"total", r.timings.total_ms}}},
      {"audit",
       {{"module_backend_texts", m.backend_texts},
        {"module_backend_requests", m.backend_requests},
        {"module_cache_hits", m.cache_hits},
        {"module_cache_hit_rate",
         module_lookups ? static_cast<double>(m.cache_hits) / static_cast<double>(module_lookups)
                        : 0.0},
        {"llm_backend_calls", r.audit.llm.backend_calls},
        {"llm_cache_hits", r.audit.llm.cache_hits},
        {"llm_cache_hit_rate",
         llm_lookups ? static_cast<double>(r.audit.llm.cache_hits) / static_cast<double>(llm_lookups)
                     : 0.0},
        {"prompt_version", r.audit.prompt_version},
        {"distractor_version", r.audit.distractor_version},
        {"summarize_prompt_sha256", r.audit.summarize_prompt_hash},
        {"generate_prompt_sha256", r.audit.generate_prompt_hashes},
        {"failed_stage", r.audit.failed_stage.empty() ? json(nullptr) : json(r.audit.failed_stage)},
        {"error", r.audit.error.empty() ? json(nullptr) : json(r.audit.error)}}},
  };
}

std::string describe(const ExplanationResult& r) {
  std::ostringstream os;
  if (!r.selected) {
    os << "No explanation was produced for module " << r.module_id << ".";
    return os.str();
  }
  os << "Module " << r.module_id << " is best explained as \"" << r.selected->text << "\"";
  if (r.selected->score_sigma) {
    os << " with an explanation score of " << format_double(*r.selected->score_sigma)
       << " sigma_f (raw difference " << format_double(*r.selected->raw_mean_diff)
       << ", sigma_f = " << format_double(r.stats.sigma_f) << ")";
  } else {
    os << " (first candidate, unscored)";
  }
  os << ". " << r.candidates.size() << " candidate(s) were derived from "
     << r.top_ngrams_used.size() << " sampled top ngrams";
  if (r.config.noise_sd_in_sigma_f > 0)
    os << " ranked under " << format_double(r.config.noise_sd_in_sigma_f) << " sigma_f noise";
  os << "; module cache hits " << r.audit.module.cache_hits << ", backend texts "
     << r.audit.module.backend_texts << ".";
  return os.str();
}

}  // namespace sasc
