#include "sasc/prompts.hpp"

#include "sasc/errors.hpp"

namespace sasc {

namespace {
constexpr std::string_view kSlot = "{slot}";
}

std::string PromptTemplate::render(std::string_view value) const {
  const auto pos = text.find(kSlot);
  if (pos == std::string::npos) throw ConfigError("template " + name + " has no slot");
  std::string out;
  out.reserve(text.size() + value.size());
  out.append(text, 0, pos);
  out.append(value);
  out.append(text, pos + kSlot.size());
  return out;
}

const PromptTemplate& summarize_template() {
  static const PromptTemplate t{
      "summarize",
      "Here is a list of phrases:\n{slot}\nWhat is a common theme among these phrases?\n"
      "The common theme among these phrases is"};
  return t;
}

const PromptTemplate& generate_template() {
  static const PromptTemplate t{
      "generate", "Generate 10 phrases that are similar to the concept of {slot}:"};
  return t;
}

std::string format_phrase_list(const std::vector<std::string>& phrases) {
  std::string out;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (i) out += '\n';
    out += "- ";
    out += phrases[i];
  }
  return out;
}

std::string render_summarize_prompt(const std::vector<std::string>& phrases) {
  return summarize_template().render(format_phrase_list(phrases));
}

std::string render_generate_prompt(std::string_view explanation) {
  return generate_template().render(explanation);
}

}  // namespace sasc
