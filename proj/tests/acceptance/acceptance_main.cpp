// Runs every primary acceptance criterion and prints one PASS/FAIL line each.
// Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "sasc/corpus.hpp"
#include "sasc/eval.hpp"
#include "sasc/explain.hpp"
#include "sasc/mock_llm.hpp"
#include "sasc/prompts.hpp"
#include "sasc/response_cache.hpp"
#include "temp_dir.hpp"

using namespace sasc;
using sasc::test::resource;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
}

LlmClient mock(const std::string& rulebook) {
  return LlmClient(std::make_shared<MockLlmBackend>(MockRulebook::load(resource(rulebook))));
}

ModuleScorer fresh_scorer() { return ModuleScorer(std::make_shared<ResponseCache>()); }

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Outcome mock_end_to_end() {
  const auto registry = load_registry(resource("mock/registry10.json"));
  const auto scorer = fresh_scorer();
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run_recovery(registry, Setting::Default, Method::Sasc, {0, 1, 2}, scorer,
                                mock("mock/rulebook.json"), ExplainConfig{});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& cell = rep.cells.at(0);
  std::ostringstream d;
  d << cell.matched << "/" << cell.n << " recovered in " << secs << " s";
  return {cell.n == 30 && cell.matched == 30 && cell.accuracy == 1.0 && secs < 30.0, d.str()};
}

Outcome baseline_gap() {
  const auto registry = load_registry(resource("mock/registry10.json"));
  const auto scorer = fresh_scorer();
  const auto llm = mock("mock/gap_rulebook.json");
  const auto sasc = run_recovery(registry, Setting::Default, Method::Sasc, {0, 1, 2}, scorer, llm,
                                 ExplainConfig{});
  const auto base = run_recovery(registry, Setting::Default, Method::Baseline, {0, 1, 2}, scorer,
                                 llm, ExplainConfig{});
  const double a = sasc.cells.at(0).accuracy, b = base.cells.at(0).accuracy;
  return {a == 1.0 && b <= 0.5, "sasc " + fmt(a) + ", baseline " + fmt(b)};
}

Outcome score_oracle() {
  const auto scorer = fresh_scorer();
  const auto m = make_lexical_module("sports");
  const auto idx = ingest_corpus({{"1", "a b c"}, {"2", "sports b c"}}, 3);
  const auto stats = scorer.compute_stats(m, idx);
  // Five tokens, one match: ratio 0.2.
  const std::vector<std::string> related(10, "sports w x y z");
  std::vector<std::string> unrelated;
  for (int i = 0; i < 10; ++i) unrelated.push_back("nothing here at all " + std::to_string(i));
  const auto c = score_explanation(scorer, m, "sports", related, unrelated, stats);
  const double expected = 0.2 / stats.sigma_f;
  const double err = std::fabs(*c.score_sigma - expected);
  return {idx.size() == 2 && err <= 1e-12,
          "score " + fmt(*c.score_sigma) + " vs " + fmt(expected) + " (|diff| " + fmt(err) + ")"};
}

Outcome affine_invariance() {
  const auto registry = load_registry(resource("mock/registry10.json"));
  const auto llm = mock("mock/gap_rulebook.json");
  const auto scorer = fresh_scorer();
  double worst = 0.0;
  bool selection_stable = true;
  std::size_t runs = 0;
  for (const auto& e : registry) {
    const auto idx = ingest_corpus(load_documents(e.corpus), 3);
    const auto base = make_lexical_module(e.groundtruth_keyphrase, e.synonyms);
    const auto ref = explain_module(scorer, base, idx, llm, ExplainConfig{});
    for (double a : {0.5, 3.0}) {
      for (double b : {-1.0, 10.0}) {
        const auto r = explain_module(scorer, make_affine_module(base, a, b), idx, llm, ExplainConfig{});
        ++runs;
        if (r.candidates.size() != ref.candidates.size()) return {false, e.name + ": candidate count differs"};
        for (std::size_t i = 0; i < r.candidates.size(); ++i) {
          if (r.candidates[i].text != ref.candidates[i].text) return {false, e.name + ": candidates differ"};
          worst = std::max(worst, std::fabs(*r.candidates[i].score_sigma - *ref.candidates[i].score_sigma));
        }
        selection_stable = selection_stable && r.selected->text == ref.selected->text;
      }
    }
  }
  return {worst <= 1e-9 && selection_stable,
          std::to_string(runs) + " wrapped runs, max |score diff| " + fmt(worst) +
              (selection_stable ? ", selection unchanged" : ", selection changed")};
}

Outcome noise_protocol() {
  const auto registry = load_registry(resource("mock/registry10.json"));
  const auto scorer = fresh_scorer();
  const auto& sports = registry.at(0);
  const auto idx = ingest_corpus(load_documents(sports.corpus), 3);
  const auto clean = make_lexical_module(sports.groundtruth_keyphrase, sports.synonyms);
  const auto stats = scorer.compute_stats(clean, idx);

  // Sample sd of 10,000 draws.
  const auto noisy = inject_noise(clean, 3.0, 17, stats);
  double sum = 0, sq = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double x = noise_draw(*noisy.noise(), "draw " + std::to_string(i));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  const double rel = std::fabs(sd / (3.0 * stats.sigma_f) - 1.0);

  // Step-two scores for fixed candidates: clean vs noisy handle.
  const auto llm = mock("mock/gap_rulebook.json");
  const auto ref = explain_module(scorer, clean, idx, llm, ExplainConfig{});
  bool bit_identical = true;
  for (const auto& c : ref.candidates) {
    const auto again = score_explanation(scorer, noisy, c.text, c.related, c.unrelated, stats);
    bit_identical = bit_identical && same_bits(*again.score_sigma, *c.score_sigma);
  }
  ExplainConfig noisy_cfg;
  noisy_cfg.noise_sd_in_sigma_f = 3.0;
  const auto noisy_run = explain_module(scorer, clean, idx, llm, noisy_cfg);
  for (const auto& c : noisy_run.candidates) {
    for (const auto& r : ref.candidates) {
      if (r.text == c.text) bit_identical = bit_identical && same_bits(*r.score_sigma, *c.score_sigma);
    }
  }

  // Accuracy over 5 seeds on the 100-ngram suite.
  const std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  const auto plain = mock("mock/rulebook.json");
  const double acc_default =
      run_recovery(registry, Setting::Default, Method::Sasc, seeds, scorer, plain, ExplainConfig{})
          .cells.at(0).accuracy;
  const double acc_noisy =
      run_recovery(registry, Setting::NoisyModule, Method::Sasc, seeds, scorer, plain, ExplainConfig{})
          .cells.at(0).accuracy;

  std::ostringstream d;
  d << "sd/3sigma_f-1 = " << rel << ", step-two " << (bit_identical ? "bit-identical" : "DIFFERS")
    << ", accuracy noisy " << acc_noisy << " <= default " << acc_default << " ("
    << idx.size() << " ngrams)";
  return {rel <= 0.03 && bit_identical && acc_noisy <= acc_default && idx.size() == 100, d.str()};
}

Outcome curve_machinery() {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> score(-1.0, 5.0);
  std::size_t points = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RecoveryRecord> recs;
    const int count = 1 + static_cast<int>(gen() % 60);
    for (int i = 0; i < count; ++i) {
      RecoveryRecord r;
      r.module = "m" + std::to_string(i);
      r.score_sigma = std::round(score(gen) * 4) / 4;  // lands on thresholds too
      r.matched = gen() % 3 != 0;
      recs.push_back(r);
    }
    const auto thresholds = default_curve_thresholds();
    const auto curve = cumulative_accuracy_curve(recs, thresholds);
    if (curve.size() != thresholds.size()) return {false, "wrong curve length"};
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      std::size_t n = 0, hit = 0;
      for (const auto& r : recs) {
        if (*r.score_sigma >= thresholds[t]) {
          ++n;
          hit += r.matched ? 1 : 0;
        }
      }
      const std::optional<double> acc =
          n == 0 ? std::nullopt : std::optional<double>(static_cast<double>(hit) / n);
      if (!(curve[t] == CurvePoint{thresholds[t], acc, n}))
        return {false, "mismatch at threshold " + fmt(thresholds[t])};
      if (t > 0 && curve[t].n > curve[t - 1].n) return {false, "n increased"};
      ++points;
    }
  }
  return {true, std::to_string(points) + " points match enumeration, n non-increasing"};
}

Outcome prompt_fidelity() {
  const auto dir = std::filesystem::path(SASC_TEST_DIR) / "golden";
  const bool s = render_summarize_prompt({"sliced cucumber and tomato", "cut the apples into",
                                          "sauteed shiitake mushrooms with"}) ==
                 sasc::test::read_file(dir / "summarize_prompt.txt");
  const bool g = render_generate_prompt("crime and criminal activity") ==
                 sasc::test::read_file(dir / "generate_prompt.txt");
  return {s && g, std::string("summarize ") + (s ? "equal" : "DIFFERS") + ", generate " +
                      (g ? "equal" : "DIFFERS")};
}

Outcome cache_economy() {
  sasc::test::TempDir dir;
  const auto registry = load_registry(resource("mock/registry10.json"));
  const auto& e = registry.at(1);
  const auto idx = ingest_corpus(load_documents(e.corpus), 3);
  const auto module = make_lexical_module(e.groundtruth_keyphrase, e.synonyms);
  const auto run = [&] {
    ModuleScorer scorer(std::make_shared<ResponseCache>(dir.path()));
    LlmClient llm(std::make_shared<MockLlmBackend>(MockRulebook::load(resource("mock/rulebook.json"))),
                  std::make_shared<JsonlStore>(dir / LlmClient::kCacheFile));
    return explain_module(scorer, module, idx, llm, ExplainConfig{});
  };
  const auto first = run();
  const auto second = run();
  const auto& m = second.audit.module;
  const auto& l = second.audit.llm;
  const std::size_t lookups = m.cache_hits + m.backend_texts;
  std::ostringstream d;
  d << "re-run: module backend " << m.backend_texts << " texts / " << m.backend_requests
    << " requests, llm backend " << l.backend_calls << " calls, cache hits " << m.cache_hits << "/"
    << lookups << " module, " << l.cache_hits << " llm";
  return {first.audit.module.backend_texts > 0 && m.backend_texts == 0 && m.backend_requests == 0 &&
              l.backend_calls == 0 && m.cache_hits > 0 && second.candidates == first.candidates,
          d.str()};
}

}  // namespace

int main() {
  criterion("mock-end-to-end", mock_end_to_end);
  criterion("baseline-gap", baseline_gap);
  criterion("score-oracle", score_oracle);
  criterion("affine-invariance", affine_invariance);
  criterion("noise-protocol", noise_protocol);
  criterion("curve-machinery", curve_machinery);
  criterion("prompt-fidelity", prompt_fidelity);
  criterion("cache-economy", cache_economy);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
