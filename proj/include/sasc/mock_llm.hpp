#pragma once

// Deterministic stand-in for the helper LLM. Output is a pure function of
// (prompt, seed), so whole pipeline runs are reproducible offline.
//
// Summarization: every token of the listed phrases is looked up in
// `summaries`; matched explanations are emitted as a bulleted list ordered by
// hit count (descending), ties by first appearance. With no match the mock
// answers with the most frequent token (ties lexicographic).
//
// Generation: ten numbered sentences built from `templates[explanation]`
// (or a built-in generic list), rotated by seed. "{}" in a template is
// replaced by the explanation.

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "sasc/llm.hpp"

namespace sasc {

struct MockRulebook {
  std::map<std::string, std::vector<std::string>> summaries;  // token -> explanations
  std::map<std::string, std::vector<std::string>> templates;  // explanation -> templates

  // Accepts {"summaries": {token: explanation | [explanation, ...]},
  //          "templates": {explanation: [template, ...]}}.
  static MockRulebook from_json(const nlohmann::json& doc);
  static MockRulebook load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

class MockLlmBackend final : public LlmBackend {
 public:
  explicit MockLlmBackend(MockRulebook rulebook);

  std::string id() const override { return id_; }
  std::string model() const override { return "deterministic-mock"; }
  std::string complete(const std::string& prompt, std::uint64_t seed,
                       double temperature) const override;
  bool is_local() const override { return true; }

  const MockRulebook& rulebook() const { return rulebook_; }

  // Generic sentence templates used when an explanation has none.
  static const std::vector<std::string>& default_templates();

 private:
  std::string summarize(const std::vector<std::string>& phrases) const;
  std::string generate(const std::string& explanation, std::size_t n, std::uint64_t seed) const;

  MockRulebook rulebook_;
  std::string id_;
};

}  // namespace sasc
