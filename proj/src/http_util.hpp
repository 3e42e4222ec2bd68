#pragma once

#include <chrono>
#include <string>
#include <thread>

#include "sasc/errors.hpp"

namespace sasc::detail {

// "http://host:port/prefix/" -> origin "http://host:port", prefix "/prefix".
struct UrlParts {
  std::string origin;
  std::string prefix;
};

inline UrlParts split_url(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline void backoff_sleep(double base_seconds, int attempt) {
  if (base_seconds <= 0.0) return;
  const double s = base_seconds * static_cast<double>(1 << attempt);
  std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

// Replaces bare NaN / Infinity / -Infinity tokens (as emitted by Python's json
// module) with null so the body parses; string contents are left alone.
inline std::string nullify_non_finite(const std::string& body, bool* replaced = nullptr) {
  std::string out;
  out.reserve(body.size());
  bool in_string = false;
  bool escape = false;
  bool any = false;
  for (std::size_t i = 0; i < body.size();) {
    const char c = body[i];
    if (in_string) {
      out.push_back(c);
      if (escape) escape = false;
      else if (c == '\\') escape = true;
      else if (c == '"') in_string = false;
      ++i;
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      ++i;
      continue;
    }
    bool matched = false;
    for (const char* tok : {"-Infinity", "Infinity", "NaN"}) {
      const std::string t(tok);
      if (body.compare(i, t.size(), t) == 0) {
        out += "null";
        i += t.size();
        matched = any = true;
        break;
      }
    }
    if (!matched) {
      out.push_back(c);
      ++i;
    }
  }
  if (replaced) *replaced = any;
  return out;
}

}  // namespace sasc::detail
