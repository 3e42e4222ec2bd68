#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sasc {

// Append-only, content-addressed key/value store backed by a JSON-lines file
// of {"k": hex, "v": value} records. A key is written at most once. Lines that
// fail to parse are skipped on load and do not affect other keys.
// Without a path the store lives in memory only.
class JsonlStore {
 public:
  JsonlStore() = default;
  explicit JsonlStore(std::filesystem::path file);

  JsonlStore(const JsonlStore&) = delete;
  JsonlStore& operator=(const JsonlStore&) = delete;

  std::optional<nlohmann::json> get(const std::string& key) const;

  // Returns false (and leaves the stored value untouched) if key exists.
  bool put(const std::string& key, const nlohmann::json& value);

  // Writes every absent key with a single flush. Returns the number written.
  std::size_t put_many(const std::vector<std::pair<std::string, nlohmann::json>>& items);

  std::size_t size() const;
  std::size_t skipped_lines() const noexcept { return skipped_lines_; }
  const std::optional<std::filesystem::path>& path() const noexcept { return file_; }

 private:
  bool insert_locked(const std::string& key, const nlohmann::json& value);

  mutable std::mutex mu_;
  std::unordered_map<std::string, nlohmann::json> map_;
  std::optional<std::filesystem::path> file_;
  std::ofstream out_;
  std::size_t skipped_lines_ = 0;
};

}  // namespace sasc
