#include "sasc/corpus.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_map>

#include "sasc/errors.hpp"
#include "sasc/hashing.hpp"

namespace sasc {
namespace {

using nlohmann::json;

bool is_word_char(UChar32 c) {
  return (U_GET_GC_MASK(c) & (U_GC_L_MASK | U_GC_N_MASK)) != 0;
}

bool is_space_char(UChar32 c) {
  return u_isUWhiteSpace(c) || (U_GET_GC_MASK(c) & (U_GC_Z_MASK | U_GC_CC_MASK)) != 0;
}

bool is_intra_word_joiner(UChar32 c) {
  return c == U'\'' || c == 0x2019 || c == U'-' || c == 0x2010 || c == 0x2011;
}

std::vector<UChar32> decode(std::string_view s) {
  std::vector<UChar32> out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 c;
    U8_NEXT(bytes, i, len, c);
    out.push_back(c < 0 ? 0xFFFD : c);
  }
  return out;
}

void append_utf8(std::string& out, UChar32 c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool err = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, c, err);
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

std::string fingerprint_of(std::vector<std::string> normalized_docs,
                           std::size_t order) {
  std::sort(normalized_docs.begin(), normalized_docs.end());
  std::string canonical;
  canonical += kNormalizationVersion;
  canonical += '\n';
  canonical += std::to_string(order);
  canonical += '\n';
  for (const auto& d : normalized_docs) {
    canonical += std::to_string(d.size());
    canonical += ':';
    canonical += d;
    canonical += '\n';
  }
  return sha256_hex(canonical);
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  const auto cps = decode(raw);
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const UChar32 c = cps[i];
    bool blank = false;
    if (U_GET_GC_MASK(c) & U_GC_P_MASK) {
      const bool keep = is_intra_word_joiner(c) && i > 0 && i + 1 < cps.size() &&
                        is_word_char(cps[i - 1]) && is_word_char(cps[i + 1]);
      blank = !keep;
    } else if (is_space_char(c)) {
      blank = true;
    }
    if (blank) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, u_tolower(c));
  }
  return out;
}

std::string lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (UChar32 c : decode(text)) append_utf8(out, u_tolower(c));
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (UChar32 c : decode(text)) {
    if (is_space_char(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    append_utf8(out, c);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < normalized.size()) {
    auto end = normalized.find(' ', start);
    if (end == std::string_view::npos) end = normalized.size();
    if (end > start) tokens.emplace_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

CorpusIndex ingest_corpus(const std::vector<Document>& docs, std::size_t ngram_order) {
  if (ngram_order == 0) throw ConfigError("ngram_order must be >= 1");
  std::set<std::string_view> ids;
  for (const auto& d : docs) {
    if (!ids.insert(d.id).second) throw ConfigError("duplicate document id: " + d.id);
  }

  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::string> normalized_docs;
  normalized_docs.reserve(docs.size());
  std::size_t token_count = 0;
  for (const auto& d : docs) {
    normalized_docs.push_back(normalize_text(d.text));
    const auto tokens = tokenize(normalized_docs.back());
    token_count += tokens.size();
    if (tokens.size() < ngram_order) continue;
    for (std::size_t i = 0; i + ngram_order <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (std::size_t j = 1; j < ngram_order; ++j) {
        key += ' ';
        key += tokens[i + j];
      }
      ++counts[key];
    }
  }
  if (counts.empty()) {
    throw EmptyCorpus("no document has at least " + std::to_string(ngram_order) +
                      " tokens");
  }

  CorpusIndex index;
  index.ngram_order = ngram_order;
  index.token_count = token_count;
  index.entries.reserve(counts.size());
  for (auto& [text, count] : counts) {
    index.entries.push_back(Ngram{text, tokenize(text), count});
  }
  std::sort(index.entries.begin(), index.entries.end(),
            [](const Ngram& a, const Ngram& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.text < b.text;
            });
  index.fingerprint = fingerprint_of(std::move(normalized_docs), ngram_order);
  return index;
}

const std::vector<Ngram>& unique_ngrams(const CorpusIndex& index) { return index.entries; }

std::vector<Document> load_documents(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw ConfigError("corpus not found: " + path.string());

  std::vector<Document> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      docs.push_back(Document{f.filename().string(), std::move(text)});
    }
    return docs;
  }

  std::ifstream in(path);
  if (!in) throw ConfigError("corpus not readable: " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      docs.push_back(Document{j.at("id").get<std::string>(), j.at("text").get<std::string>()});
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": malformed corpus record: " + e.what());
    }
  }
  return docs;
}

void save_documents(const std::vector<Document>& docs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto& d : docs) out << json{{"id", d.id}, {"text", d.text}}.dump() << '\n';
}

void save_index(const CorpusIndex& index, const std::filesystem::path& path) {
  json entries = json::array();
  for (const auto& e : index.entries) entries.push_back({{"text", e.text}, {"count", e.count}});
  const json doc{{"ngram_order", index.ngram_order},
                 {"fingerprint", index.fingerprint},
                 {"token_count", index.token_count},
                 {"entries", std::move(entries)}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << doc.dump() << '\n';
}

CorpusIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("index not found: " + path.string());
  const auto doc = json::parse(in);
  CorpusIndex index;
  index.ngram_order = doc.at("ngram_order").get<std::size_t>();
  index.fingerprint = doc.at("fingerprint").get<std::string>();
  index.token_count = doc.value("token_count", std::size_t{0});
  for (const auto& e : doc.at("entries")) {
    auto text = e.at("text").get<std::string>();
    auto tokens = tokenize(text);
    if (tokens.size() != index.ngram_order)
      throw ConfigError("index entry has wrong order: " + text);
    index.entries.push_back(Ngram{std::move(text), std::move(tokens), e.at("count").get<std::size_t>()});
  }
  return index;
}

}  // namespace sasc
