#include "sasc/module.hpp"

#include <cmath>
#include <unordered_map>

#include "sasc/corpus.hpp"
#include "sasc/errors.hpp"
#include "sasc/format.hpp"
#include "sasc/hashing.hpp"
#include "sasc/response_cache.hpp"
#include "sasc/rng.hpp"

namespace sasc {
namespace {

class LexicalModule final : public TextModule {
 public:
  LexicalModule(std::string keyphrase, std::vector<std::string> synonyms)
      : keyphrase_(std::move(keyphrase)), synonyms_(std::move(synonyms)) {
    for (const auto& t : tokenize(normalize_text(keyphrase_))) tokens_.insert(t);
    for (const auto& s : synonyms_)
      for (const auto& t : tokenize(normalize_text(s))) tokens_.insert(t);
    id_ = "lexical:";
    bool first = true;
    for (const auto& t : tokens_) {
      if (!first) id_ += '|';
      id_ += t;
      first = false;
    }
  }

  const std::string& id() const override { return id_; }
  ModuleKind kind() const override { return ModuleKind::LexicalSynthetic; }
  nlohmann::json descriptor() const override {
    return {{"keyphrase", keyphrase_},
            {"synonyms", synonyms_},
            {"tokens", std::vector<std::string>(tokens_.begin(), tokens_.end())}};
  }

  std::vector<double> evaluate(std::span<const std::string> texts) const override {
    std::vector<double> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
      const auto toks = tokenize(normalize_text(text));
      if (toks.empty()) {
        out.push_back(0.0);
        continue;
      }
      std::size_t hits = 0;
      for (const auto& t : toks) hits += tokens_.count(t);
      out.push_back(static_cast<double>(hits) / static_cast<double>(toks.size()));
    }
    return out;
  }

 private:
  std::string keyphrase_;
  std::vector<std::string> synonyms_;
  std::set<std::string> tokens_;
  std::string id_;
};

class ConstantModule final : public TextModule {
 public:
  explicit ConstantModule(double value) : value_(value), id_("constant:" + format_double(value)) {}
  const std::string& id() const override { return id_; }
  ModuleKind kind() const override { return ModuleKind::Constant; }
  nlohmann::json descriptor() const override { return {{"value", value_}}; }
  std::vector<double> evaluate(std::span<const std::string> texts) const override {
    return std::vector<double>(texts.size(), value_);
  }

 private:
  double value_;
  std::string id_;
};

class AffineModule final : public TextModule {
 public:
  AffineModule(std::shared_ptr<const TextModule> base, double a, double b)
      : base_(std::move(base)), a_(a), b_(b) {
    id_ = "affine(" + format_double(a) + "," + format_double(b) + "):" + base_->id();
  }
  const std::string& id() const override { return id_; }
  ModuleKind kind() const override { return ModuleKind::Affine; }
  nlohmann::json descriptor() const override {
    return {{"a", a_}, {"b", b_}, {"base", base_->id()}};
  }
  std::vector<double> evaluate(std::span<const std::string> texts) const override {
    auto v = base_->evaluate(texts);
    for (auto& x : v) x = a_ * x + b_;
    return v;
  }

 private:
  std::shared_ptr<const TextModule> base_;
  double a_, b_;
  std::string id_;
};

}  // namespace

std::string to_string(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::LexicalSynthetic: return "lexical-synthetic";
    case ModuleKind::RemoteHttp: return "remote-http";
    case ModuleKind::Constant: return "constant";
    case ModuleKind::Affine: return "affine";
  }
  return "unknown";
}

ModuleHandle make_lexical_module(const std::string& keyphrase,
                                 const std::vector<std::string>& synonyms) {
  if (normalize_text(keyphrase).empty()) throw ConfigError("keyphrase must be non-empty");
  return ModuleHandle(std::make_shared<LexicalModule>(keyphrase, synonyms));
}

ModuleHandle make_constant_module(double value) {
  return ModuleHandle(std::make_shared<ConstantModule>(value));
}

ModuleHandle make_affine_module(const ModuleHandle& base, double a, double b) {
  return ModuleHandle(std::make_shared<AffineModule>(base.shared(), a, b), base.noise());
}

ModuleHandle inject_noise(const ModuleHandle& module, double noise_sd_in_sigma_f,
                          std::uint64_t seed, const ResponseStats& stats) {
  if (!(stats.sigma_f > 0.0))
    throw DegenerateModule("cannot scale noise: sigma_f is zero for " + module.module_id());
  if (noise_sd_in_sigma_f < 0.0) throw ConfigError("noise sd must be non-negative");
  if (noise_sd_in_sigma_f == 0.0) return module.clean();
  return ModuleHandle(module.shared(),
                      NoiseSpec{noise_sd_in_sigma_f, noise_sd_in_sigma_f * stats.sigma_f, seed});
}

double noise_draw(const NoiseSpec& spec, const std::string& text) {
  Rng rng(derive_seed(spec.seed, "noise:" + normalize_text(text)));
  return spec.sd * rng.normal();
}

ModuleScorer::ModuleScorer(std::shared_ptr<ResponseCache> cache) : cache_(std::move(cache)) {
  if (!cache_) cache_ = std::make_shared<ResponseCache>();
}

std::vector<double> ModuleScorer::score_texts(const ModuleHandle& module,
                                              std::span<const std::string> texts,
                                              CallCounters* counters) const {
  const auto& id = module.module_id();
  std::vector<double> out(texts.size());
  std::vector<std::string> keys(texts.size());

  // Misses are deduplicated by key; one representative text goes to the backend.
  std::unordered_map<std::string, std::size_t> miss_slot;
  std::vector<std::string> miss_texts;
  std::vector<std::string> miss_keys;
  std::vector<bool> hit(texts.size(), false);
  CallCounters local;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = ResponseCache::key_for(id, texts[i]);
    if (auto v = cache_->get(keys[i])) {
      out[i] = *v;
      hit[i] = true;
      ++local.cache_hits;
    } else if (miss_slot.try_emplace(keys[i], miss_texts.size()).second) {
      miss_texts.push_back(texts[i]);
      miss_keys.push_back(keys[i]);
    }
  }

  if (!miss_texts.empty()) {
    const auto values = module.module().evaluate(miss_texts);
    ++local.backend_requests;
    local.backend_texts += miss_texts.size();
    if (values.size() != miss_texts.size())
      throw ProtocolError("module " + id + " returned " + std::to_string(values.size()) +
                          " values for " + std::to_string(miss_texts.size()) + " texts");
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (!std::isfinite(values[j])) throw NonFiniteResponse(miss_texts[j], values[j]);
    }
    std::vector<std::pair<std::string, double>> fresh;
    fresh.reserve(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) fresh.emplace_back(miss_keys[j], values[j]);
    cache_->put_many(fresh);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (hit[i]) continue;
      // Re-read so that concurrent writers of the same key agree bit-for-bit.
      auto v = cache_->get(keys[i]);
      out[i] = v ? *v : values[miss_slot.at(keys[i])];
    }
  }

  if (const auto& noise = module.noise()) {
    for (std::size_t i = 0; i < texts.size(); ++i) out[i] += noise_draw(*noise, texts[i]);
  }
  if (counters) *counters += local;
  return out;
}

ResponseStats ModuleScorer::compute_stats(const ModuleHandle& module, const CorpusIndex& index,
                                          CallCounters* counters) const {
  if (index.empty()) throw EmptyCorpus("cannot compute stats over an empty index");
  const auto clean = module.clean();
  ResponseStats stats;
  if (auto cached = cache_->get_stats(clean.module_id(), index.fingerprint)) {
    stats = *cached;
  } else {
    std::vector<std::string> texts;
    texts.reserve(index.size());
    for (const auto& e : index.entries) texts.push_back(e.text);
    const auto values = score_texts(clean, texts, counters);

    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    stats = ResponseStats{mean, std::sqrt(ss / static_cast<double>(values.size())),
                          values.size(), index.fingerprint};
    cache_->put_stats(clean.module_id(), stats);
  }
  if (!(stats.sigma_f > 0.0))
    throw DegenerateModule("module " + clean.module_id() +
                           " has constant response over the corpus (sigma_f = 0)");
  return stats;
}

}  // namespace sasc
