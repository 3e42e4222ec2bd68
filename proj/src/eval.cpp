#include "sasc/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

#include "sasc/errors.hpp"
#include "sasc/format.hpp"
#include "sasc/hashing.hpp"
#include "sasc/rng.hpp"
#include "sasc/stemmer.hpp"

namespace sasc {

using nlohmann::json;

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> s = {"a",  "an", "and", "the", "of", "to", "in", "on",
                                          "or", "for", "with", "is", "are", "about", "related"};
  return s;
}

std::set<std::string> content_stems(const std::string& text) {
  std::set<std::string> out;
  for (const auto& t : tokenize(normalize_text(text))) {
    if (!stopwords().count(t)) out.insert(porter_stem(t));
  }
  return out;
}

auto record_order(const RecoveryRecord& r) {
  return std::tuple(static_cast<int>(r.setting), static_cast<int>(r.method), r.module, r.seed);
}

}  // namespace

std::string to_string(Setting s) {
  switch (s) {
    case Setting::Default: return "default";
    case Setting::RestrictedCorpus: return "restricted-corpus";
    case Setting::NoisyModule: return "noisy-module";
  }
  return "unknown";
}

std::string to_string(Method m) { return m == Method::Sasc ? "sasc" : "baseline"; }

Setting parse_setting(const std::string& s) {
  if (s == "default") return Setting::Default;
  if (s == "restricted-corpus") return Setting::RestrictedCorpus;
  if (s == "noisy-module") return Setting::NoisyModule;
  throw ConfigError("unknown setting: " + s +
                    " (expected default, restricted-corpus or noisy-module)");
}

Method parse_method(const std::string& s) {
  if (s == "sasc") return Method::Sasc;
  if (s == "baseline") return Method::Baseline;
  throw ConfigError("unknown method: " + s + " (expected sasc or baseline)");
}

std::string RecoveryRecord::record_id() const {
  return to_string(setting) + "/" + to_string(method) + "/" + module + "/" + std::to_string(seed);
}

std::vector<SyntheticRegistryEntry> load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("registry not found: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("registry " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw ConfigError("registry must be a JSON array");
  std::vector<SyntheticRegistryEntry> out;
  std::set<std::string> names;
  const auto base = path.parent_path();
  for (const auto& e : doc) {
    SyntheticRegistryEntry entry;
    try {
      entry.name = e.at("name").get<std::string>();
      entry.groundtruth_keyphrase = e.at("groundtruth_keyphrase").get<std::string>();
      entry.synonyms = e.value("synonyms", std::vector<std::string>{});
      std::filesystem::path corpus = e.at("corpus").get<std::string>();
      entry.corpus = corpus.is_absolute() ? corpus : base / corpus;
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("malformed registry entry: ") + ex.what());
    }
    if (!names.insert(entry.name).second)
      throw ConfigError("duplicate registry name: " + entry.name);
    out.push_back(std::move(entry));
  }
  return out;
}

bool match_explanation(const std::string& predicted, const std::string& groundtruth_keyphrase,
                       const std::vector<std::string>& synonyms) {
  const auto pred_norm = normalize_text(predicted);
  if (pred_norm.empty()) return false;
  if (pred_norm == normalize_text(groundtruth_keyphrase)) return true;
  for (const auto& s : synonyms) {
    if (pred_norm == normalize_text(s)) return true;
  }
  const auto pred_stems = content_stems(pred_norm);
  auto any_shared = [&](const std::string& phrase) {
    for (const auto& stem : content_stems(phrase)) {
      if (pred_stems.count(stem)) return true;
    }
    return false;
  };
  if (any_shared(groundtruth_keyphrase)) return true;
  return std::any_of(synonyms.begin(), synonyms.end(), any_shared);
}

bool is_near_miss(const std::string& predicted, const std::string& groundtruth_keyphrase,
                  const std::vector<std::string>& synonyms) {
  if (match_explanation(predicted, groundtruth_keyphrase, synonyms)) return false;
  std::set<std::string> truth = content_stems(groundtruth_keyphrase);
  for (const auto& s : synonyms) truth.merge(content_stems(s));
  auto close = [](const std::string& a, const std::string& b) {
    if (a.size() < 4 || b.size() < 4) return false;
    return a.compare(0, 4, b, 0, 4) == 0 || a.find(b) != std::string::npos ||
           b.find(a) != std::string::npos;
  };
  for (const auto& p : content_stems(predicted)) {
    for (const auto& t : truth) {
      if (close(p, t)) return true;
    }
  }
  return false;
}

std::vector<double> default_curve_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 16; ++i) t.push_back(0.25 * i);
  return t;
}

std::vector<CurvePoint> cumulative_accuracy_curve(const std::vector<RecoveryRecord>& records,
                                                  const std::vector<double>& thresholds) {
  std::vector<const RecoveryRecord*> scored;
  for (const auto& r : records) {
    if (r.score_sigma) scored.push_back(&r);
  }
  if (scored.empty()) throw NoScoredRecords("no record carries an explanation score");
  std::vector<CurvePoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t n = 0, hit = 0;
    for (const auto* r : scored) {
      if (*r->score_sigma >= t) {
        ++n;
        hit += r->matched ? 1 : 0;
      }
    }
    CurvePoint p{t, std::nullopt, n};
    if (n > 0) p.accuracy = static_cast<double>(hit) / static_cast<double>(n);
    out.push_back(p);
  }
  return out;
}

std::vector<std::size_t> seeded_derangement(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ConfigError("a derangement needs at least two entries");
  Rng rng(seed);
  std::vector<std::size_t> p(n);
  for (;;) {
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(p[i], p[rng.below(i + 1)]);
    bool fixed = false;
    for (std::size_t i = 0; i < n && !fixed; ++i) fixed = p[i] == i;
    if (!fixed) return p;
  }
}

RecoveryReport aggregate(std::vector<RecoveryRecord> records, std::vector<double> thresholds) {
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return record_order(a) < record_order(b); });
  RecoveryReport report;
  std::map<std::pair<int, int>, AccuracyCell> cells;
  for (const auto& r : records) {
    auto& c = cells[{static_cast<int>(r.setting), static_cast<int>(r.method)}];
    c.setting = r.setting;
    c.method = r.method;
    ++c.n;
    c.matched += r.matched ? 1 : 0;
  }
  for (auto& [key, c] : cells) {
    const double n = static_cast<double>(c.n);
    c.accuracy = static_cast<double>(c.matched) / n;
    // Sample sd of the 0/1 outcomes over sqrt(n).
    c.sem = c.n > 1 ? std::sqrt(c.accuracy * (1.0 - c.accuracy) / (n - 1.0)) : 0.0;
    report.cells.push_back(c);
  }
  const bool any_scored =
      std::any_of(records.begin(), records.end(), [](const auto& r) { return r.score_sigma.has_value(); });
  if (any_scored) report.curve = cumulative_accuracy_curve(records, thresholds);
  report.thresholds = std::move(thresholds);
  report.records = std::move(records);
  return report;
}

RecoveryReport run_recovery(const std::vector<SyntheticRegistryEntry>& registry, Setting setting,
                            Method method, const std::vector<std::uint64_t>& seeds,
                            const ModuleScorer& scorer, const LlmClient& llm,
                            const ExplainConfig& config, const RecoveryOptions& options) {
  if (registry.empty()) throw RegistryEmpty("registry has no entries");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (setting == Setting::RestrictedCorpus && registry.size() < 2)
    throw ConfigError("restricted-corpus setting needs at least two registry entries");

  ExplainConfig cfg = config;
  if (setting == Setting::NoisyModule) {
    if (cfg.noise_sd_in_sigma_f == 0.0) cfg.noise_sd_in_sigma_f = 3.0;
  } else {
    cfg.noise_sd_in_sigma_f = 0.0;
  }
  cfg.validate();

  // Indexes are built once and shared read-only across workers.
  struct Loaded {
    std::optional<CorpusIndex> index;
    std::string error;
  };
  std::vector<Loaded> corpora(registry.size());
  for (std::size_t i = 0; i < registry.size(); ++i) {
    try {
      corpora[i].index = ingest_corpus(load_documents(registry[i].corpus), cfg.ngram_order);
    } catch (const std::exception& e) {
      corpora[i].error = e.what();
    }
  }

  struct Task {
    std::size_t entry;
    std::size_t corpus;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (auto seed : seeds) {
    std::vector<std::size_t> assign(registry.size());
    if (setting == Setting::RestrictedCorpus) {
      assign = seeded_derangement(registry.size(), derive_seed(seed, "restricted-corpus"));
    } else {
      std::iota(assign.begin(), assign.end(), 0);
    }
    for (std::size_t i = 0; i < registry.size(); ++i) tasks.push_back({i, assign[i], seed});
  }

  std::vector<RecoveryRecord> records(tasks.size());
  auto run_task = [&](std::size_t t) {
    const auto& task = tasks[t];
    const auto& entry = registry[task.entry];
    RecoveryRecord rec;
    rec.module = entry.name;
    rec.setting = setting;
    rec.method = method;
    rec.seed = task.seed;
    rec.corpus = registry[task.corpus].name;
    rec.groundtruth = entry.groundtruth_keyphrase;
    try {
      const auto& loaded = corpora[task.corpus];
      if (!loaded.index) throw ConfigError(loaded.error);
      const auto module = make_lexical_module(entry.groundtruth_keyphrase, entry.synonyms);
      ExplainConfig run_cfg = cfg;
      run_cfg.seed = task.seed;
      const auto result = method == Method::Sasc
                              ? explain_module(scorer, module, *loaded.index, llm, run_cfg)
                              : baseline_explain(scorer, module, *loaded.index, llm, run_cfg);
      rec.predicted = result.selected->text;
      rec.score_sigma = result.selected->score_sigma;
      rec.matched = match_explanation(rec.predicted, entry.groundtruth_keyphrase, entry.synonyms);
      rec.needs_review = is_near_miss(rec.predicted, entry.groundtruth_keyphrase, entry.synonyms);
    } catch (const std::exception& e) {
      rec.error = e.what();
      rec.matched = false;
    }
    records[t] = std::move(rec);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, tasks.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < tasks.size(); t = next++) run_task(t);
    });
  }
  for (auto& th : pool) th.join();

  return aggregate(std::move(records), options.thresholds);
}

RecoveryReport merge_reports(const std::vector<RecoveryReport>& reports) {
  std::vector<RecoveryRecord> all;
  std::vector<double> thresholds = default_curve_thresholds();
  for (const auto& r : reports) {
    all.insert(all.end(), r.records.begin(), r.records.end());
    if (!r.thresholds.empty()) thresholds = r.thresholds;
  }
  return aggregate(std::move(all), std::move(thresholds));
}

}  // namespace sasc
