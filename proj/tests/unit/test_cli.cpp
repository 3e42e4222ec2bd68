#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <nlohmann/json.hpp>

#include "fake_module_server.hpp"
#include "temp_dir.hpp"

using namespace sasc;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;
using sasc::test::read_file;
using sasc::test::resource;
using sasc::test::TempDir;
using sasc::test::write_file;

namespace {

struct Outcome {
  int code = -1;
  std::string out;  // stdout and stderr interleaved
};

Outcome run_cli(const std::string& args, const TempDir& dir) {
  const std::string cmd = "cd '" + dir.path().string() + "' && '" SASC_CLI_PATH "' --cache-dir '" +
                          (dir / "cache").string() + "' " + args + " 2>&1";
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, n);
  const int status = ::pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

void write_toy_corpus(const TempDir& dir) {
  write_file(dir / "toy.jsonl",
             R"({"id":"1","text":"the team played sports all day long"}
{"id":"2","text":"we walked along the quiet river bank"}
{"id":"3","text":"fresh bread from the corner bakery"}
{"id":"4","text":"she watched sports on a rainy evening"}
{"id":"5","text":"old letters in a wooden box"}
)");
}

}  // namespace

TEST_CASE("explain recovers a lexical module on a toy corpus", "[cli][explain]") {
  TempDir dir;
  write_toy_corpus(dir);
  const auto o = run_cli("explain --module lexical:sports --corpus toy.jsonl --output run", dir);
  INFO(o.out);
  CHECK(o.code == 0);
  CHECK_THAT(o.out, ContainsSubstring("sports"));
  const auto result = json::parse(read_file(dir / "run/result.json"));
  CHECK(result.at("selected").at("text") == "sports");
  CHECK(result.at("complete") == true);
  const auto config = json::parse(read_file(dir / "run/config.json"));
  CHECK(config.at("module") == "lexical:sports");
}

TEST_CASE("explain --json prints the result document", "[cli][explain]") {
  TempDir dir;
  write_toy_corpus(dir);
  const auto o = run_cli("--json explain --module lexical:sports --corpus toy.jsonl --output run", dir);
  REQUIRE(o.code == 0);
  const auto doc = json::parse(o.out);
  CHECK(doc.at("schema_version") == "explanation-result/1");
  CHECK(doc.at("selected").at("text") == "sports");
}

TEST_CASE("explain error paths map to exit codes", "[cli][explain][errors]") {
  TempDir dir;
  write_toy_corpus(dir);
  auto o = run_cli("explain --module lexical:sports --corpus missing.jsonl", dir);
  CHECK(o.code == 1);
  CHECK_THAT(o.out, ContainsSubstring("corpus not found"));

  o = run_cli("explain --module constant:0.5 --corpus toy.jsonl --output const", dir);
  CHECK(o.code == 2);
  CHECK(std::filesystem::exists(dir / "const/result.json"));
  const auto partial = json::parse(read_file(dir / "const/result.json"));
  CHECK(partial.at("complete") == false);

  o = run_cli("explain --module wobble:1 --corpus toy.jsonl", dir);
  CHECK(o.code == 1);
  o = run_cli("explain --corpus toy.jsonl", dir);
  CHECK(o.code == 1);
  o = run_cli("explain --module lexical:sports --corpus toy.jsonl --synth-count 3", dir);
  CHECK(o.code == 1);
  o = run_cli("explain --bogus-flag", dir);
  CHECK(o.code == 1);
}

TEST_CASE("config file values are overridden by flags", "[cli][config]") {
  TempDir dir;
  write_toy_corpus(dir);
  write_file(dir / "cfg.json", R"({"module":"lexical:sports","corpus":"toy.jsonl","seed":7,"num_candidates":3})");
  auto o = run_cli("--config cfg.json --seed 11 explain --output run", dir);
  INFO(o.out);
  REQUIRE(o.code == 0);
  const auto config = json::parse(read_file(dir / "run/config.json"));
  CHECK(config.at("seed") == 11);
  CHECK(config.at("num_candidates") == 3);

  write_file(dir / "bad.json", R"({"modul":"lexical:sports"})");
  o = run_cli("--config bad.json explain", dir);
  CHECK(o.code == 1);
  CHECK_THAT(o.out, ContainsSubstring("modul"));
}

TEST_CASE("evaluate prints a table and writes a report", "[cli][evaluate]") {
  TempDir dir;
  const auto o = run_cli("evaluate --seeds 0,1 --registry '" + resource("mock/registry10.json").string() +
                             "' --method both --output out",
                         dir);
  INFO(o.out);
  REQUIRE(o.code == 0);
  CHECK_THAT(o.out, ContainsSubstring("default            sasc       1.000"));
  CHECK_THAT(o.out, ContainsSubstring("baseline"));
  bool found = false;
  for (const auto& e : std::filesystem::directory_iterator(dir / "out")) {
    found = true;
    CHECK(std::filesystem::exists(e.path() / "report.json"));
    CHECK(read_file(e.path() / "table.csv").rfind("setting,method,accuracy,sem\n", 0) == 0);
    CHECK(std::filesystem::exists(e.path() / "curve.csv"));
  }
  CHECK(found);
}

TEST_CASE("evaluate rejects unknown settings", "[cli][evaluate][errors]") {
  TempDir dir;
  const auto o = run_cli("evaluate --registry '" + resource("mock/registry10.json").string() +
                             "' --setting sideways",
                         dir);
  CHECK(o.code == 1);
  CHECK_THAT(o.out, ContainsSubstring("sideways"));
  CHECK_THAT(o.out, ContainsSubstring("--setting"));
}

TEST_CASE("probe-server reports conformance", "[cli][probe]") {
  sasc::test::FakeModuleServer server({{"sports", make_lexical_module("sports")}});
  TempDir dir;
  auto o = run_cli("probe-server --url " + server.url(), dir);
  INFO(o.out);
  CHECK(o.code == 0);
  CHECK_THAT(o.out, ContainsSubstring("OK: 1 modules"));

  server.set_fault(sasc::test::ModuleFault::NanValue);
  o = run_cli("probe-server --url " + server.url(), dir);
  CHECK(o.code == 3);
  CHECK_THAT(o.out, ContainsSubstring("FAIL"));
  CHECK_THAT(o.out, ContainsSubstring("non-finite value"));

  server.set_fault(sasc::test::ModuleFault::WrongContentType);
  o = run_cli("probe-server --url " + server.url(), dir);
  CHECK(o.code == 3);
  CHECK_THAT(o.out, ContainsSubstring("FAIL"));

  o = run_cli("probe-server --url http://127.0.0.1:1", dir);
  CHECK(o.code == 3);
}

TEST_CASE("explain works against a remote module", "[cli][explain][remote]") {
  sasc::test::FakeModuleServer server({{"sports", make_lexical_module("sports")}});
  TempDir dir;
  write_toy_corpus(dir);
  const auto o = run_cli("explain --module remote:sports --server " + server.url() +
                             " --corpus toy.jsonl --output run",
                         dir);
  INFO(o.out);
  CHECK(o.code == 0);
  CHECK(json::parse(read_file(dir / "run/result.json")).at("selected").at("text") == "sports");
}

TEST_CASE("cache stats and clear", "[cli][cache]") {
  TempDir dir;
  write_toy_corpus(dir);
  REQUIRE(run_cli("explain --module lexical:sports --corpus toy.jsonl --output run", dir).code == 0);
  auto o = run_cli("--json cache stats", dir);
  REQUIRE(o.code == 0);
  const auto stats = json::parse(o.out);
  CHECK(stats.at("responses.jsonl").at("entries").get<int>() > 0);
  CHECK(stats.at("llm.jsonl").at("entries").get<int>() > 0);

  o = run_cli("cache clear", dir);
  CHECK(o.code == 0);
  CHECK_THAT(o.out, ContainsSubstring("removed"));
  o = run_cli("--json cache stats", dir);
  CHECK(json::parse(o.out).at("responses.jsonl").at("entries") == 0);
}
