#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sasc {

// Bumped whenever a template below changes; participates in LLM cache keys.
inline constexpr std::string_view kPromptVersion = "prompts-v1";

struct PromptTemplate {
  std::string name;
  std::string text;  // contains exactly one "{slot}"

  // Substitutes the slot verbatim; nothing else is touched.
  std::string render(std::string_view value) const;
};

const PromptTemplate& summarize_template();
const PromptTemplate& generate_template();

// Number of items the generation template asks for.
inline constexpr std::size_t kGenerationBatch = 10;

// "- p1\n- p2\n..."
std::string format_phrase_list(const std::vector<std::string>& phrases);

std::string render_summarize_prompt(const std::vector<std::string>& phrases);
std::string render_generate_prompt(std::string_view explanation);

}  // namespace sasc
