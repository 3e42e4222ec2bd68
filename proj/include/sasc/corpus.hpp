#pragma once

// Corpus ingestion and the deduplicated word-level ngram index.
//
// Ngrams are formed by a sliding window over the whitespace tokens of each
// normalized document. Windows never span two documents, and documents with
// fewer tokens than the ngram order contribute nothing.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sasc {

inline constexpr std::string_view kNormalizationVersion = "norm-v1";

struct Document {
  std::string id;
  std::string text;
};

struct Ngram {
  std::string text;                 // tokens joined by a single space
  std::vector<std::string> tokens;
  std::size_t count = 0;
};

// Immutable once built; safe to share across threads.
struct CorpusIndex {
  std::size_t ngram_order = 3;
  std::vector<Ngram> entries;       // descending count, then lexicographic
  std::size_t token_count = 0;
  std::string fingerprint;          // hex SHA-256

  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }
};

// Lowercase, strip Unicode punctuation (keeping apostrophes and hyphens that
// sit between two word characters), collapse whitespace, trim. Idempotent.
std::string normalize_text(std::string_view raw);

// Unicode simple lowercase mapping, nothing else.
std::string lowercase(std::string_view text);

// Collapses runs of whitespace to one ASCII space and trims both ends.
std::string collapse_whitespace(std::string_view text);

// Splits already-normalized text on single spaces.
std::vector<std::string> tokenize(std::string_view normalized);

// Builds the ngram index. Throws EmptyCorpus when no document has at least
// ngram_order tokens, ConfigError on duplicate ids or ngram_order == 0.
CorpusIndex ingest_corpus(const std::vector<Document>& docs,
                          std::size_t ngram_order = 3);

const std::vector<Ngram>& unique_ngrams(const CorpusIndex& index);

// Newline-delimited {"id","text"} records, or a directory of .txt files
// (id = filename). Throws ConfigError("corpus not found: ...") when missing.
std::vector<Document> load_documents(const std::filesystem::path& path);

void save_documents(const std::vector<Document>& docs,
                    const std::filesystem::path& path);

void save_index(const CorpusIndex& index, const std::filesystem::path& path);
CorpusIndex load_index(const std::filesystem::path& path);

}  // namespace sasc
