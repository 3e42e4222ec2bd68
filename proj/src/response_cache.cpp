#include "sasc/response_cache.hpp"

#include <fstream>

#include "sasc/corpus.hpp"
#include "sasc/errors.hpp"
#include "sasc/hashing.hpp"

namespace sasc {

using nlohmann::json;

JsonlStore::JsonlStore(std::filesystem::path file) : file_(std::move(file)) {
  namespace fs = std::filesystem;
  if (file_->has_parent_path()) fs::create_directories(file_->parent_path());

  bool needs_newline = false;
  if (std::ifstream in{*file_, std::ios::binary}) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto rec = json::parse(line);
        map_.try_emplace(rec.at("k").get<std::string>(), rec.at("v"));
      } catch (const json::exception&) {
        ++skipped_lines_;
      }
    }
    in.clear();
    in.seekg(0, std::ios::end);
    if (in.tellg() > 0) {
      in.seekg(-1, std::ios::end);
      needs_newline = in.get() != '\n';
    }
  }
  out_.open(*file_, std::ios::binary | std::ios::app);
  if (!out_) throw ConfigError("cannot open cache file: " + file_->string());
  // A torn final record must not swallow the next append.
  if (needs_newline) out_ << '\n';
}

std::optional<json> JsonlStore::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return std::optional<json>(std::in_place, it->second);
}

bool JsonlStore::insert_locked(const std::string& key, const json& value) {
  if (!map_.try_emplace(key, value).second) return false;
  if (out_.is_open()) out_ << json{{"k", key}, {"v", value}}.dump() << '\n';
  return true;
}

bool JsonlStore::put(const std::string& key, const json& value) {
  std::lock_guard lock(mu_);
  const bool written = insert_locked(key, value);
  if (written && out_.is_open()) out_.flush();
  return written;
}

std::size_t JsonlStore::put_many(const std::vector<std::pair<std::string, json>>& items) {
  std::lock_guard lock(mu_);
  std::size_t written = 0;
  for (const auto& [k, v] : items) written += insert_locked(k, v) ? 1 : 0;
  if (written && out_.is_open()) out_.flush();
  return written;
}

std::size_t JsonlStore::size() const {
  std::lock_guard lock(mu_);
  return map_.size();
}

ResponseCache::ResponseCache() = default;

ResponseCache::ResponseCache(const std::filesystem::path& dir)
    : responses_(dir / kResponsesFile), stats_(dir / kStatsFile) {}

std::string ResponseCache::key_for(const std::string& module_id, const std::string& text) {
  return sha256_fields({"response", module_id, normalize_text(text)});
}

std::optional<double> ResponseCache::get(const std::string& key) const {
  auto v = responses_.get(key);
  if (!v || !v->is_number()) return std::nullopt;
  return v->get<double>();
}

bool ResponseCache::put(const std::string& key, double value) { return responses_.put(key, value); }

std::size_t ResponseCache::put_many(const std::vector<std::pair<std::string, double>>& items) {
  std::vector<std::pair<std::string, json>> records;
  records.reserve(items.size());
  for (const auto& [k, v] : items) records.emplace_back(k, v);
  return responses_.put_many(records);
}

std::optional<ResponseStats> ResponseCache::get_stats(const std::string& module_id,
                                                      const std::string& fingerprint) const {
  auto v = stats_.get(sha256_fields({"stats", module_id, fingerprint}));
  if (!v) return std::nullopt;
  try {
    return ResponseStats{v->at("mean").get<double>(), v->at("sigma_f").get<double>(),
                         v->at("n").get<std::size_t>(), fingerprint};
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void ResponseCache::put_stats(const std::string& module_id, const ResponseStats& stats) {
  stats_.put(sha256_fields({"stats", module_id, stats.corpus_fingerprint}),
             json{{"module_id", module_id},
                  {"mean", stats.mean},
                  {"sigma_f", stats.sigma_f},
                  {"n", stats.n}});
}

}  // namespace sasc
