#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace sasc {

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view data);

// Hash over several fields; fields are length-prefixed so ("ab","c") and
// ("a","bc") never collide.
std::string sha256_fields(std::initializer_list<std::string_view> fields);

// Derives an independent 64-bit stream seed from a root seed and a stage tag.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage,
                          std::uint64_t index = 0);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sasc
