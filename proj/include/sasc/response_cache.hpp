#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sasc/jsonl_store.hpp"
#include "sasc/module.hpp"

namespace sasc {

// Module responses keyed by hash(module_id, normalized text), plus response
// statistics keyed by (module_id, corpus fingerprint). With a directory the
// cache persists to responses.jsonl and stats.jsonl inside it.
class ResponseCache {
 public:
  ResponseCache();
  explicit ResponseCache(const std::filesystem::path& dir);

  static std::string key_for(const std::string& module_id, const std::string& text);

  std::optional<double> get(const std::string& key) const;
  bool put(const std::string& key, double value);
  std::size_t put_many(const std::vector<std::pair<std::string, double>>& items);

  std::optional<ResponseStats> get_stats(const std::string& module_id,
                                         const std::string& fingerprint) const;
  void put_stats(const std::string& module_id, const ResponseStats& stats);

  std::size_t size() const { return responses_.size(); }
  std::size_t stats_size() const { return stats_.size(); }

  static constexpr const char* kResponsesFile = "responses.jsonl";
  static constexpr const char* kStatsFile = "stats.jsonl";

 private:
  JsonlStore responses_;
  JsonlStore stats_;
};

}  // namespace sasc
