#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sasc/corpus.hpp"
#include "sasc/errors.hpp"
#include "sasc/eval.hpp"
#include "sasc/explain.hpp"
#include "sasc/format.hpp"
#include "sasc/hashing.hpp"
#include "sasc/llm_http.hpp"
#include "sasc/mock_llm.hpp"
#include "sasc/remote_module.hpp"
#include "sasc/response_cache.hpp"

#ifndef SASC_DEFAULT_RULEBOOK
#define SASC_DEFAULT_RULEBOOK "resources/mock/rulebook.json"
#endif

namespace sasc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Fully resolved configuration: defaults < config file < command-line flags.
struct RunConfig {
  ExplainConfig explain;
  std::string corpus;
  std::string module;
  std::string backend = "mock";
  std::string endpoint = "https://api.openai.com";
  std::string model = "gpt-3.5-turbo-instruct";
  double temperature = 0.7;
  int max_tokens = 256;
  std::string rulebook;
  std::string server;
  std::string registry;
  std::string output_dir;
  std::string cache_dir;
  std::size_t workers = 4;
  std::size_t llm_inflight = 2;
  std::string setting = "default";
  std::string method = "sasc";
  std::vector<std::uint64_t> seeds = {0, 1, 2};

  json to_json() const {
    json j = explain.to_json();
    j.update(json{{"corpus", corpus},       {"module", module},
                  {"backend", backend},     {"endpoint", endpoint},
                  {"model", model},         {"temperature", temperature},
                  {"max_tokens", max_tokens}, {"rulebook", rulebook},
                  {"server", server},       {"registry", registry},
                  {"output_dir", output_dir}, {"cache_dir", cache_dir},
                  {"workers", workers},     {"llm_inflight", llm_inflight},
                  {"setting", setting},     {"method", method},
                  {"seeds", seeds}});
    return j;
  }

  void apply_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    json explain_part = json::object();
    static const std::set<std::string> kExplainKeys = {
        "ngram_order", "top_pool", "sample_size", "num_candidates",
        "synth_count", "seed",     "noise_sd_in_sigma_f"};
    try {
      for (const auto& [k, v] : doc.items()) {
        if (kExplainKeys.count(k)) explain_part[k] = v;
        else if (k == "corpus") corpus = v.get<std::string>();
        else if (k == "module") module = v.get<std::string>();
        else if (k == "backend") backend = v.get<std::string>();
        else if (k == "endpoint") endpoint = v.get<std::string>();
        else if (k == "model") model = v.get<std::string>();
        else if (k == "temperature") temperature = v.get<double>();
        else if (k == "max_tokens") max_tokens = v.get<int>();
        else if (k == "rulebook") rulebook = v.get<std::string>();
        else if (k == "server") server = v.get<std::string>();
        else if (k == "registry") registry = v.get<std::string>();
        else if (k == "output_dir") output_dir = v.get<std::string>();
        else if (k == "cache_dir") cache_dir = v.get<std::string>();
        else if (k == "workers") workers = v.get<std::size_t>();
        else if (k == "llm_inflight") llm_inflight = v.get<std::size_t>();
        else if (k == "setting") setting = v.get<std::string>();
        else if (k == "method") method = v.get<std::string>();
        else if (k == "seeds") seeds = v.get<std::vector<std::uint64_t>>();
        else throw ConfigError("unknown config key: " + k);
      }
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad config value: ") + e.what());
    }
    explain = ExplainConfig::from_json(explain_part, explain);
  }
};

struct Flags {
  std::string config_file;
  bool json_out = false;
  RunConfig cfg;
  std::string seeds_csv;
  std::string url;
  std::string probe_module;
  std::string similarity;
};

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stoull(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad seed: " + item);
    }
  }
  if (out.empty()) throw ConfigError("--seeds needs at least one value");
  return out;
}

std::string cache_dir_of(const RunConfig& cfg) {
  if (!cfg.cache_dir.empty()) return cfg.cache_dir;
  if (const char* env = std::getenv("SASC_CACHE_DIR"); env && *env) return env;
  return ".sasc-cache";
}

std::string short_hash(const json& j) { return sha256_hex(j.dump()).substr(0, 12); }

LlmClient make_llm(const RunConfig& cfg, const fs::path& cache_dir) {
  std::shared_ptr<const LlmBackend> backend;
  if (cfg.backend == "mock") {
    const auto path = cfg.rulebook.empty() ? fs::path(SASC_DEFAULT_RULEBOOK) : fs::path(cfg.rulebook);
    backend = std::make_shared<MockLlmBackend>(MockRulebook::load(path));
  } else if (cfg.backend == "openai" || cfg.backend == "openai-chat") {
    OpenAiOptions opt;
    opt.endpoint = cfg.endpoint;
    opt.model = cfg.model;
    opt.chat = cfg.backend == "openai-chat";
    opt.max_tokens = cfg.max_tokens;
    backend = std::make_shared<OpenAiBackend>(opt);
  } else {
    throw ConfigError("unknown backend: " + cfg.backend + " (expected mock, openai, openai-chat)");
  }
  auto store = std::make_shared<JsonlStore>(cache_dir / LlmClient::kCacheFile);
  return LlmClient(backend, store, LlmOptions{cfg.temperature, cfg.llm_inflight});
}

ModuleHandle make_module(const RunConfig& cfg) {
  const auto& spec = cfg.module;
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError("module spec must look like lexical:KEY[,SYN...], constant:V, "
                      "remote:NAME or registry:NAME");
  const auto kind = spec.substr(0, colon);
  const auto arg = spec.substr(colon + 1);
  if (kind == "lexical") {
    std::vector<std::string> parts;
    std::stringstream ss(arg);
    std::string p;
    while (std::getline(ss, p, ',')) parts.push_back(p);
    if (parts.empty()) throw ConfigError("lexical module needs a keyphrase");
    return make_lexical_module(parts.front(), {parts.begin() + 1, parts.end()});
  }
  if (kind == "constant") {
    try {
      return make_constant_module(std::stod(arg));
    } catch (const std::logic_error&) {
      throw ConfigError("bad constant: " + arg);
    }
  }
  if (kind == "remote") {
    if (cfg.server.empty()) throw ConfigError("remote modules need --server URL");
    return make_remote_module(cfg.server, arg);
  }
  if (kind == "registry") {
    if (cfg.registry.empty()) throw ConfigError("registry modules need --registry FILE");
    for (const auto& e : load_registry(cfg.registry)) {
      if (e.name == arg) return make_lexical_module(e.groundtruth_keyphrase, e.synonyms);
    }
    throw ConfigError("no registry entry named " + arg);
  }
  throw ConfigError("unknown module kind: " + kind);
}

void write_json(const fs::path& p, const json& j) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DegenerateModule*>(&e)) return kExitDegenerate;
  if (dynamic_cast<const BackendError*>(&e) || dynamic_cast<const RemoteUnavailable*>(&e) ||
      dynamic_cast<const NonFiniteResponse*>(&e) || dynamic_cast<const EmptyCompletion*>(&e) ||
      dynamic_cast<const InsufficientGenerations*>(&e) || dynamic_cast<const ProtocolError*>(&e))
    return kExitBackend;
  return kExitConfig;
}

int cmd_explain(const Flags& f) {
  const auto& cfg = f.cfg;
  if (cfg.module.empty()) throw ConfigError("--module is required");
  if (cfg.corpus.empty()) throw ConfigError("--corpus is required");
  const fs::path cache_dir = cache_dir_of(cfg);

  const auto docs = load_documents(cfg.corpus);
  const auto index = ingest_corpus(docs, cfg.explain.ngram_order);
  const auto module = make_module(cfg);
  const auto llm = make_llm(cfg, cache_dir);
  const ModuleScorer scorer(std::make_shared<ResponseCache>(cache_dir));

  const auto resolved = cfg.to_json();
  const fs::path out_dir = cfg.output_dir.empty()
                               ? fs::path("sasc-runs") / ("explain-" + short_hash(resolved))
                               : fs::path(cfg.output_dir);
  write_json(out_dir / "config.json", resolved);

  ExplanationResult result;
  try {
    explain_module(scorer, module, index, llm, cfg.explain, &result);
  } catch (const Error&) {
    write_json(out_dir / "result.json", to_json(result));
    throw;
  }
  write_json(out_dir / "result.json", to_json(result));
  if (f.json_out) std::cout << to_json(result).dump(2) << '\n';
  else std::cout << describe(result) << '\n';
  return kExitOk;
}

std::string format_table(const RecoveryReport& report) {
  std::ostringstream os;
  os << "setting            method     accuracy  sem       n\n";
  for (const auto& c : report.cells) {
    char line[128];
    std::snprintf(line, sizeof line, "%-18s %-10s %-9.3f %-9.3f %zu\n", to_string(c.setting).c_str(),
                  to_string(c.method).c_str(), c.accuracy, c.sem, c.n);
    os << line;
  }
  return os.str();
}

int cmd_evaluate(Flags f) {
  auto& cfg = f.cfg;
  if (cfg.registry.empty()) throw ConfigError("--registry is required");
  const auto setting = parse_setting(cfg.setting);
  std::vector<Method> methods;
  if (cfg.method == "both") methods = {Method::Sasc, Method::Baseline};
  else methods = {parse_method(cfg.method)};
  if (setting == Setting::NoisyModule && cfg.explain.noise_sd_in_sigma_f == 0.0)
    cfg.explain.noise_sd_in_sigma_f = 3.0;

  const fs::path cache_dir = cache_dir_of(cfg);
  const auto registry = load_registry(cfg.registry);
  const auto llm = make_llm(cfg, cache_dir);
  const ModuleScorer scorer(std::make_shared<ResponseCache>(cache_dir));

  const auto resolved = cfg.to_json();
  const auto run_id = "eval-" + short_hash(resolved);
  const fs::path out_dir =
      (cfg.output_dir.empty() ? fs::path("sasc-runs") : fs::path(cfg.output_dir)) / run_id;

  std::vector<RecoveryReport> parts;
  for (auto m : methods) {
    parts.push_back(run_recovery(registry, setting, m, cfg.seeds, scorer, llm, cfg.explain,
                                 RecoveryOptions{cfg.workers, default_curve_thresholds()}));
  }
  auto report = merge_reports(parts);
  if (!f.similarity.empty()) {
    std::ifstream in(f.similarity);
    if (!in) throw ConfigError("similarity file not found: " + f.similarity);
    merge_similarity(report, json::parse(in));
  }
  emit_report(report, out_dir);
  write_json(out_dir / "config.json", resolved);

  if (f.json_out) {
    json out = to_json(report);
    out["run_id"] = run_id;
    out["output_dir"] = out_dir.string();
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << format_table(report) << "report written to " << out_dir.string() << '\n';
  }
  return kExitOk;
}

int cmd_probe(const Flags& f) {
  if (f.url.empty()) throw ConfigError("--url is required");
  RemoteOptions opt;
  opt.retries = 0;
  opt.timeout_s = 10;
  try {
    const auto result =
        probe_server(f.url, f.probe_module.empty() ? std::nullopt : std::optional(f.probe_module), opt);
    if (f.json_out) {
      std::cout << json{{"ok", true},
                        {"modules", result.modules},
                        {"probed_module", result.probed_module},
                        {"canary_values", result.canary_values},
                        {"list_latency_ms", result.list_latency_ms},
                        {"score_latency_ms", result.score_latency_ms}}
                       .dump(2)
                << '\n';
    } else {
      std::cout << "OK: " << result.modules.size() << " modules (probed '" << result.probed_module
                << "', score latency " << format_double(result.score_latency_ms) << " ms)\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "FAIL: " << e.what() << '\n';
    if (f.json_out) std::cout << json{{"ok", false}, {"error", e.what()}}.dump(2) << '\n';
    return kExitBackend;
  }
}

std::uintmax_t file_size_or_zero(const fs::path& p) {
  std::error_code ec;
  const auto s = fs::file_size(p, ec);
  return ec ? 0 : s;
}

int cmd_cache_stats(const Flags& f) {
  const fs::path dir = cache_dir_of(f.cfg);
  json out{{"cache_dir", dir.string()}};
  for (const char* name : {ResponseCache::kResponsesFile, ResponseCache::kStatsFile, LlmClient::kCacheFile}) {
    std::size_t entries = 0, corrupt = 0;
    if (fs::exists(dir / name)) {
      JsonlStore store(dir / name);
      entries = store.size();
      corrupt = store.skipped_lines();
    }
    out[name] = {{"entries", entries}, {"bytes", file_size_or_zero(dir / name)}, {"corrupt_lines", corrupt}};
  }
  if (f.json_out) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "cache " << dir.string() << '\n';
    for (const char* name : {ResponseCache::kResponsesFile, ResponseCache::kStatsFile, LlmClient::kCacheFile}) {
      std::cout << "  " << name << ": " << out[name]["entries"] << " entries, " << out[name]["bytes"]
                << " bytes\n";
    }
  }
  return kExitOk;
}

int cmd_cache_clear(const Flags& f) {
  const fs::path dir = cache_dir_of(f.cfg);
  std::size_t removed = 0;
  for (const char* name : {ResponseCache::kResponsesFile, ResponseCache::kStatsFile, LlmClient::kCacheFile}) {
    removed += fs::remove(dir / name) ? 1 : 0;
  }
  std::cout << "removed " << removed << " cache file(s) from " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Summarize-and-score explanations for black-box text modules"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  auto& c = f.cfg;
  std::vector<std::pair<CLI::Option*, std::function<void()>>> overrides;
  auto flag = [&](CLI::App* sub, const std::string& name, auto& dest, const std::string& help) {
    using T = std::remove_reference_t<decltype(dest)>;
    auto holder = std::make_shared<T>();
    auto* opt = sub->add_option(name, *holder, help);
    overrides.emplace_back(opt, [holder, &dest] { dest = *holder; });
    return opt;
  };

  app.add_option("--config", f.config_file, "JSON config file (flags override it)");
  app.add_flag("--json", f.json_out, "Machine-readable JSON on stdout");
  flag(&app, "--seed", c.explain.seed, "Root seed for every stochastic stage");
  flag(&app, "--workers", c.workers, "Parallel (module, seed) workers");
  flag(&app, "--llm-inflight", c.llm_inflight, "Concurrent LLM requests");
  flag(&app, "--cache-dir", c.cache_dir, "Cache directory (default $SASC_CACHE_DIR or .sasc-cache)");

  auto add_run_flags = [&](CLI::App* sub) {
    flag(sub, "--backend", c.backend, "mock | openai | openai-chat");
    flag(sub, "--rulebook", c.rulebook, "Mock rulebook JSON");
    flag(sub, "--endpoint", c.endpoint, "OpenAI-compatible base URL");
    flag(sub, "--model", c.model, "LLM model name");
    flag(sub, "--temperature", c.temperature, "Sampling temperature");
    flag(sub, "--max-tokens", c.max_tokens, "Completion length limit");
    flag(sub, "--output", c.output_dir, "Output directory");
    flag(sub, "--ngram-order", c.explain.ngram_order, "Ngram length");
    flag(sub, "--top-pool", c.explain.top_pool, "Top ngrams to sample from");
    flag(sub, "--sample-size", c.explain.sample_size, "Ngrams shown to the LLM");
    flag(sub, "--num-candidates", c.explain.num_candidates, "Candidate explanations");
    flag(sub, "--synth-count", c.explain.synth_count, "Synthetic sentences per candidate");
    flag(sub, "--noise-sd", c.explain.noise_sd_in_sigma_f, "Ranking noise in sigma_f units");
  };

  auto* explain = app.add_subcommand("explain", "Explain one module");
  add_run_flags(explain);
  flag(explain, "--module", c.module, "lexical:KEY[,SYN..] | constant:V | remote:NAME | registry:NAME");
  flag(explain, "--corpus", c.corpus, "Corpus JSONL file or directory of .txt files");
  flag(explain, "--server", c.server, "Module server base URL for remote modules");
  flag(explain, "--registry", c.registry, "Registry file for registry modules");

  auto* evaluate = app.add_subcommand("evaluate", "Run a synthetic recovery sweep");
  add_run_flags(evaluate);
  flag(evaluate, "--registry", c.registry, "Registry JSON file");
  flag(evaluate, "--setting", c.setting, "default | restricted-corpus | noisy-module");
  flag(evaluate, "--method", c.method, "sasc | baseline | both");
  auto* seeds_opt = evaluate->add_option("--seeds", f.seeds_csv, "Comma-separated seeds");
  evaluate->add_option("--similarity", f.similarity, "JSON {record_id: score} to merge");

  auto* probe = app.add_subcommand("probe-server", "Check a module server for protocol conformance");
  probe->add_option("--url", f.url, "Server base URL")->required();
  probe->add_option("--module", f.probe_module, "Module to probe (default: first listed)");

  auto* cache = app.add_subcommand("cache", "Inspect or clear the cache");
  cache->require_subcommand(1);
  auto* cache_stats = cache->add_subcommand("stats", "Show cache entry counts");
  auto* cache_clear = cache->add_subcommand("clear", "Delete cache files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!f.config_file.empty()) {
      std::ifstream in(f.config_file);
      if (!in) throw ConfigError("config file not found: " + f.config_file);
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("config file " + f.config_file + ": " + e.what());
      }
      c.apply_json(doc);
    }
    for (auto& [opt, apply] : overrides) {
      if (opt->count() > 0) apply();
    }
    if (seeds_opt->count() > 0) c.seeds = parse_seeds(f.seeds_csv);

    if (explain->parsed()) return cmd_explain(f);
    if (evaluate->parsed()) return cmd_evaluate(f);
    if (probe->parsed()) return cmd_probe(f);
    if (cache_stats->parsed()) return cmd_cache_stats(f);
    if (cache_clear->parsed()) return cmd_cache_clear(f);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (evaluate->parsed()) std::cerr << evaluate->help();
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitConfig;
}

}  // namespace sasc::cli
