#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sasc {

inline constexpr std::string_view kDistractorVersion = "distractors-v1";

// Fixed pool of 50 generic sentences used to top up unrelated synthetic
// text when the other candidates of a run do not provide enough.
const std::vector<std::string>& distractor_pool();

}  // namespace sasc
