#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>

#include "sasc/errors.hpp"
#include "sasc/eval.hpp"
#include "sasc/mock_llm.hpp"
#include "sasc/response_cache.hpp"
#include "temp_dir.hpp"

using namespace sasc;
using nlohmann::json;
using sasc::test::resource;

namespace {

LlmClient shipped_mock(const std::string& rulebook = "mock/rulebook.json") {
  return LlmClient(std::make_shared<MockLlmBackend>(MockRulebook::load(resource(rulebook))));
}

RecoveryRecord scored(std::string module, double score, bool matched, std::uint64_t seed = 0) {
  RecoveryRecord r;
  r.module = std::move(module);
  r.seed = seed;
  r.score_sigma = score;
  r.matched = matched;
  return r;
}

}  // namespace

TEST_CASE("match_explanation follows the stemmed token rule", "[eval][match]") {
  CHECK(match_explanation("crime and criminal activity", "crime", {}));
  CHECK_FALSE(match_explanation("language", "ungrammatical", {}));
  CHECK(match_explanation("ungrammatical", "ungrammatical", {}));
  CHECK(match_explanation("Sports!", "sports", {}));
  CHECK(match_explanation("a sporting event", "sports", {}));
  CHECK(match_explanation("medicine and doctors", "health", {"medical", "medicine"}));
  CHECK(match_explanation("pro-choice", "abortion", {"pro-choice"}));
  CHECK_FALSE(match_explanation("the and of", "the", {}));
  CHECK_FALSE(match_explanation("", "sports", {}));
  CHECK_FALSE(match_explanation("everyday routines", "sports", {"sport"}));
}

TEST_CASE("near misses are flagged for review", "[eval][match]") {
  CHECK(is_near_miss("grammatical errors", "ungrammatical", {}));
  CHECK_FALSE(is_near_miss("language", "ungrammatical", {}));
  CHECK_FALSE(is_near_miss("crime and criminal activity", "crime", {}));  // a match, not a miss
  CHECK(is_near_miss("economic growth", "economy", {}));
}

TEST_CASE("cumulative curve matches direct enumeration", "[eval][curve]") {
  const std::vector<RecoveryRecord> recs = {scored("a", 2, true), scored("b", 0, false)};
  const auto curve = cumulative_accuracy_curve(recs, {0, 1});
  REQUIRE(curve.size() == 2);
  CHECK(curve[0] == CurvePoint{0, 0.5, 2});
  CHECK(curve[1] == CurvePoint{1, 1.0, 1});

  const auto empty_cell = cumulative_accuracy_curve(recs, {5});
  CHECK(empty_cell[0].n == 0);
  CHECK_FALSE(empty_cell[0].accuracy.has_value());

  RecoveryRecord unscored;
  unscored.matched = true;
  CHECK_THROWS_AS(cumulative_accuracy_curve({unscored}, {0}), NoScoredRecords);
  CHECK_THROWS_AS(cumulative_accuracy_curve({}, {0}), NoScoredRecords);
}

TEST_CASE("all-matched records give a flat curve", "[eval][curve]") {
  std::vector<RecoveryRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back(scored("m" + std::to_string(i), 0.4 * i, true));
  for (const auto& p : cumulative_accuracy_curve(recs, default_curve_thresholds())) {
    if (p.n > 0) CHECK(*p.accuracy == 1.0);
  }
}

TEST_CASE("curve n is non-increasing and unscored records are ignored", "[eval][curve][property]") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> score(-1.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RecoveryRecord> recs;
    for (int i = 0; i < 40; ++i) recs.push_back(scored("m" + std::to_string(i), score(gen), gen() % 2 == 0));
    RecoveryRecord base;
    base.method = Method::Baseline;
    base.matched = true;
    recs.push_back(base);
    const auto curve = cumulative_accuracy_curve(recs, default_curve_thresholds());
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].n <= curve[i - 1].n);
  }
}

TEST_CASE("default thresholds span 0 to 4 in quarters", "[eval][curve]") {
  const auto t = default_curve_thresholds();
  REQUIRE(t.size() == 17);
  CHECK(t.front() == 0.0);
  CHECK(t[1] == 0.25);
  CHECK(t.back() == 4.0);
}

TEST_CASE("seeded derangements have no fixed points", "[eval][derangement][property]") {
  for (std::size_t n : {2u, 3u, 10u, 54u}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto p = seeded_derangement(n, seed);
      auto sorted = p;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(sorted[i] == i);
        CHECK(p[i] != i);
      }
      CHECK(seeded_derangement(n, seed) == p);
    }
  }
  CHECK(seeded_derangement(2, 0) == std::vector<std::size_t>{1, 0});
  CHECK(seeded_derangement(10, 1) != seeded_derangement(10, 2));
  CHECK_THROWS_AS(seeded_derangement(1, 0), ConfigError);
}

TEST_CASE("aggregate computes accuracy and pooled SEM", "[eval][aggregate]") {
  std::vector<RecoveryRecord> recs;
  for (int i = 0; i < 4; ++i) recs.push_back(scored("m" + std::to_string(i), 1, i < 3));
  const auto rep = aggregate(recs);
  REQUIRE(rep.cells.size() == 1);
  CHECK(rep.cells[0].n == 4);
  CHECK(rep.cells[0].matched == 3);
  CHECK(rep.cells[0].accuracy == 0.75);
  // sd of {1,1,1,0} with ddof 1 is 0.5; over sqrt(4).
  CHECK_THAT(rep.cells[0].sem, Catch::Matchers::WithinAbs(0.25, 1e-15));

  auto shuffled = recs;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(aggregate(shuffled) == rep);
}

TEST_CASE("registries load with relative corpus paths", "[eval][registry]") {
  const auto reg = load_registry(resource("mock/registry10.json"));
  REQUIRE(reg.size() == 10);
  CHECK(reg[1].name == "crime");
  CHECK(reg[1].synonyms == std::vector<std::string>{"criminal"});
  CHECK(std::filesystem::exists(reg[1].corpus));

  const auto live = load_registry(resource("live/registry54.json"));
  CHECK(live.size() == 54);
  CHECK(live[7].groundtruth_keyphrase == "crime");
  CHECK(live[53].name == "53-politic");

  sasc::test::TempDir dir;
  sasc::test::write_file(dir / "dup.json",
                         R"([{"name":"a","groundtruth_keyphrase":"x","corpus":"c"},
                             {"name":"a","groundtruth_keyphrase":"y","corpus":"c"}])");
  CHECK_THROWS_AS(load_registry(dir / "dup.json"), ConfigError);
  sasc::test::write_file(dir / "bad.json", R"([{"name":"a"}])");
  CHECK_THROWS_AS(load_registry(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_registry(dir / "missing.json"), ConfigError);
}

TEST_CASE("mock registry default setting recovers every module", "[eval][recovery]") {
  const auto reg = load_registry(resource("mock/registry10.json"));
  ModuleScorer scorer(std::make_shared<ResponseCache>());
  const auto rep = run_recovery(reg, Setting::Default, Method::Sasc, {0, 1, 2}, scorer,
                                shipped_mock(), ExplainConfig{});
  CHECK(rep.records.size() == 30);
  REQUIRE(rep.cells.size() == 1);
  CHECK(rep.cells[0].accuracy == 1.0);
  for (const auto& r : rep.records) {
    CHECK(r.error == std::nullopt);
    CHECK(r.corpus == r.module);
    CHECK(r.score_sigma.has_value());
  }
  CHECK_FALSE(rep.curve.empty());
}

TEST_CASE("recovery reports are deterministic across worker counts", "[eval][recovery][property]") {
  const auto reg = load_registry(resource("mock/registry10.json"));
  ModuleScorer a(std::make_shared<ResponseCache>());
  ModuleScorer b(std::make_shared<ResponseCache>());
  const auto one = run_recovery(reg, Setting::NoisyModule, Method::Sasc, {0, 1}, a, shipped_mock(),
                                ExplainConfig{}, RecoveryOptions{1, default_curve_thresholds()});
  const auto many = run_recovery(reg, Setting::NoisyModule, Method::Sasc, {0, 1}, b, shipped_mock(),
                                 ExplainConfig{}, RecoveryOptions{8, default_curve_thresholds()});
  CHECK(one == many);
}

TEST_CASE("restricted corpus never uses a module's own corpus", "[eval][recovery]") {
  const auto reg = load_registry(resource("mock/registry10.json"));
  ModuleScorer scorer(std::make_shared<ResponseCache>());
  const auto rep = run_recovery(reg, Setting::RestrictedCorpus, Method::Sasc, {0, 1}, scorer,
                                shipped_mock(), ExplainConfig{});
  CHECK(rep.records.size() == 20);
  std::set<std::string> seed0, seed1;
  for (const auto& r : rep.records) {
    CHECK(r.corpus != r.module);
    (r.seed == 0 ? seed0 : seed1).insert(r.module + ">" + r.corpus);
  }
  CHECK(seed0 != seed1);  // re-drawn per seed
}

TEST_CASE("noisy setting does not beat the default", "[eval][recovery][noise]") {
  const auto reg = load_registry(resource("mock/registry10.json"));
  ModuleScorer scorer(std::make_shared<ResponseCache>());
  const std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  const auto clean = run_recovery(reg, Setting::Default, Method::Sasc, seeds, scorer, shipped_mock(), ExplainConfig{});
  const auto noisy = run_recovery(reg, Setting::NoisyModule, Method::Sasc, seeds, scorer, shipped_mock(), ExplainConfig{});
  CHECK(noisy.cells[0].accuracy <= clean.cells[0].accuracy);
}

TEST_CASE("baseline loses to SASC under the gap rulebook", "[eval][recovery][baseline]") {
  const auto reg = load_registry(resource("mock/registry10.json"));
  ModuleScorer scorer(std::make_shared<ResponseCache>());
  const auto llm = shipped_mock("mock/gap_rulebook.json");
  const auto rep = merge_reports(
      {run_recovery(reg, Setting::Default, Method::Sasc, {0, 1, 2}, scorer, llm, ExplainConfig{}),
       run_recovery(reg, Setting::Default, Method::Baseline, {0, 1, 2}, scorer, llm, ExplainConfig{})});
  REQUIRE(rep.cells.size() == 2);
  CHECK(rep.cells[0].method == Method::Sasc);
  CHECK(rep.cells[0].accuracy == 1.0);
  CHECK(rep.cells[1].method == Method::Baseline);
  CHECK(rep.cells[1].accuracy <= 0.5);
  for (const auto& r : rep.records) {
    if (r.method == Method::Baseline) CHECK_FALSE(r.score_sigma.has_value());
  }
}

TEST_CASE("failures become unmatched records", "[eval][recovery][errors]") {
  auto reg = load_registry(resource("mock/registry10.json"));
  reg.resize(2);
  reg[1].corpus = "/nonexistent/corpus.jsonl";
  ModuleScorer scorer(std::make_shared<ResponseCache>());
  const auto rep = run_recovery(reg, Setting::Default, Method::Sasc, {0}, scorer, shipped_mock(), ExplainConfig{});
  REQUIRE(rep.records.size() == 2);
  const auto& bad = rep.records[0].module == "crime" ? rep.records[0] : rep.records[1];
  CHECK_FALSE(bad.matched);
  REQUIRE(bad.error.has_value());
  CHECK_THAT(*bad.error, Catch::Matchers::ContainsSubstring("corpus not found"));
  CHECK(rep.cells[0].accuracy == 0.5);

  CHECK_THROWS_AS(run_recovery({}, Setting::Default, Method::Sasc, {0}, scorer, shipped_mock(), ExplainConfig{}),
                  RegistryEmpty);
}

TEST_CASE("setting and method names parse", "[eval]") {
  CHECK(parse_setting("noisy-module") == Setting::NoisyModule);
  CHECK(to_string(Setting::RestrictedCorpus) == "restricted-corpus");
  CHECK(parse_method("baseline") == Method::Baseline);
  CHECK_THROWS_AS(parse_setting("loud"), ConfigError);
  CHECK_THROWS_AS(parse_method("both"), ConfigError);
  RecoveryRecord r;
  r.module = "crime";
  r.seed = 2;
  CHECK(r.record_id() == "default/sasc/crime/2");
}
