#pragma once

#include <string>
#include <string_view>

namespace sasc {

// Porter (1980) suffix-stripping stemmer for lowercase ASCII words. Words
// with non-ASCII letters or of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace sasc
