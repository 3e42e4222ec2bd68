#include "sasc/mock_llm.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "sasc/corpus.hpp"
#include "sasc/errors.hpp"
#include "sasc/hashing.hpp"
#include "sasc/prompts.hpp"

namespace sasc {

using nlohmann::json;

MockRulebook MockRulebook::from_json(const json& doc) {
  MockRulebook rb;
  try {
    if (doc.contains("summaries")) {
      for (const auto& [token, value] : doc.at("summaries").items()) {
        auto& list = rb.summaries[normalize_text(token)];
        if (value.is_string()) list.push_back(value.get<std::string>());
        else
          for (const auto& v : value) list.push_back(v.get<std::string>());
      }
    }
    if (doc.contains("templates")) {
      for (const auto& [expl, value] : doc.at("templates").items())
        rb.templates[expl] = value.get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed mock rulebook: ") + e.what());
  }
  return rb;
}

MockRulebook MockRulebook::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("rulebook not found: " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("rulebook " + path.string() + ": " + e.what());
  }
}

json MockRulebook::to_json() const {
  return json{{"summaries", summaries}, {"templates", templates}};
}

MockLlmBackend::MockLlmBackend(MockRulebook rulebook)
    : rulebook_(std::move(rulebook)),
      id_("mock:" + sha256_hex(rulebook_.to_json().dump()).substr(0, 16)) {}

const std::vector<std::string>& MockLlmBackend::default_templates() {
  static const std::vector<std::string> t = {
      "a short story about {}",
      "{} was the topic of the whole evening",
      "my neighbor keeps talking about {}",
      "everyone in the room cared about {}",
      "the lecture focused entirely on {}",
      "she wrote a long letter about {}",
      "they spent the afternoon discussing {}",
      "a podcast episode devoted to {}",
      "the magazine printed a feature on {}",
      "he asked me what i thought about {}",
      "an old book explaining {}",
      "the documentary was mostly about {}",
      "our class project covered {}",
      "a heated debate over {}",
      "the museum opened an exhibit on {}",
      "i read an essay on {} last night",
  };
  return t;
}

std::string MockLlmBackend::complete(const std::string& prompt, std::uint64_t seed,
                                     double /*temperature*/) const {
  static const std::string kSumHead = "Here is a list of phrases:\n";
  static const std::string kSumTail = "\nWhat is a common theme among these phrases?";
  static const std::string kGenHead = "Generate ";
  static const std::string kGenMid = " phrases that are similar to the concept of ";

  if (prompt.rfind(kSumHead, 0) == 0) {
    const auto tail = prompt.find(kSumTail);
    if (tail == std::string::npos) throw BackendError("mock: malformed summarization prompt");
    std::vector<std::string> phrases;
    const auto body = prompt.substr(kSumHead.size(), tail - kSumHead.size());
    std::size_t start = 0;
    while (start <= body.size()) {
      auto end = body.find('\n', start);
      if (end == std::string::npos) end = body.size();
      auto line = body.substr(start, end - start);
      if (line.rfind("- ", 0) == 0) phrases.push_back(line.substr(2));
      start = end + 1;
    }
    return summarize(phrases);
  }
  if (prompt.rfind(kGenHead, 0) == 0) {
    const auto mid = prompt.find(kGenMid);
    if (mid == std::string::npos || prompt.back() != ':')
      throw BackendError("mock: malformed generation prompt");
    const auto n = std::stoul(prompt.substr(kGenHead.size(), mid - kGenHead.size()));
    const auto start = mid + kGenMid.size();
    return generate(prompt.substr(start, prompt.size() - 1 - start), n, seed);
  }
  throw BackendError("mock: unrecognized prompt");
}

std::string MockLlmBackend::summarize(const std::vector<std::string>& phrases) const {
  struct Hit {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Hit> hits;
  std::map<std::string, std::size_t> token_freq;
  std::size_t order = 0;
  for (const auto& p : phrases) {
    for (const auto& tok : tokenize(normalize_text(p))) {
      ++token_freq[tok];
      auto it = rulebook_.summaries.find(tok);
      if (it == rulebook_.summaries.end()) continue;
      for (const auto& expl : it->second) {
        auto [h, inserted] = hits.try_emplace(expl, Hit{0, order});
        if (inserted) ++order;
        ++h->second.count;
      }
    }
  }
  if (hits.empty()) {
    if (token_freq.empty()) return "";
    auto best = std::max_element(token_freq.begin(), token_freq.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    return "- " + best->first;
  }
  std::vector<std::pair<std::string, Hit>> ranked(hits.begin(), hits.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first < b.second.first;
  });
  std::string out;
  for (const auto& [expl, h] : ranked) {
    if (!out.empty()) out += '\n';
    out += "- " + expl;
  }
  return out;
}

std::string MockLlmBackend::generate(const std::string& explanation, std::size_t n,
                                     std::uint64_t seed) const {
  const auto it = rulebook_.templates.find(explanation);
  const auto& templates = it != rulebook_.templates.end() && !it->second.empty()
                              ? it->second
                              : default_templates();
  const std::size_t offset = static_cast<std::size_t>(splitmix64(seed) % templates.size());
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string sentence = templates[(offset + i) % templates.size()];
    if (auto pos = sentence.find("{}"); pos != std::string::npos)
      sentence.replace(pos, 2, explanation);
    out += std::to_string(i + 1) + ". " + sentence + "\n";
  }
  return out;
}

}  // namespace sasc
