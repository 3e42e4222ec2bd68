#pragma once

// Synthetic-module recovery experiments: registry handling, the Default /
// Restricted corpus / Noisy module settings, SASC vs. baseline, recovery
// accuracy and the cumulative accuracy-vs-score curve.

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sasc/explain.hpp"

namespace sasc {

inline constexpr std::string_view kReportSchema = "recovery-report/1";

enum class Setting { Default, RestrictedCorpus, NoisyModule };
enum class Method { Sasc, Baseline };

std::string to_string(Setting s);
std::string to_string(Method m);
Setting parse_setting(const std::string& s);  // throws ConfigError
Method parse_method(const std::string& s);

struct SyntheticRegistryEntry {
  std::string name;
  std::string groundtruth_keyphrase;
  std::vector<std::string> synonyms;
  std::filesystem::path corpus;  // absolute, or relative to the registry file

  bool operator==(const SyntheticRegistryEntry&) const = default;
};

// JSON array of {"name", "groundtruth_keyphrase", "synonyms", "corpus"}.
// Corpus paths are resolved against the registry file's directory.
std::vector<SyntheticRegistryEntry> load_registry(const std::filesystem::path& path);

struct RecoveryRecord {
  std::string module;
  Setting setting = Setting::Default;
  Method method = Method::Sasc;
  std::uint64_t seed = 0;
  std::string corpus;                  // name of the entry whose corpus was used
  std::string predicted;
  std::string groundtruth;
  bool matched = false;
  std::optional<double> score_sigma;   // SASC only
  std::optional<std::string> error;
  std::optional<double> similarity;    // merged from an external scorer
  bool needs_review = false;           // unmatched near-miss, for human inspection

  std::string record_id() const;
  bool operator==(const RecoveryRecord&) const = default;
};

struct AccuracyCell {
  Setting setting = Setting::Default;
  Method method = Method::Sasc;
  std::size_t n = 0;
  std::size_t matched = 0;
  double accuracy = 0.0;
  double sem = 0.0;   // standard error of the mean over all (module, seed) records

  bool operator==(const AccuracyCell&) const = default;
};

struct CurvePoint {
  double threshold = 0.0;
  std::optional<double> accuracy;  // nullopt when n == 0
  std::size_t n = 0;

  bool operator==(const CurvePoint&) const = default;
};

struct RecoveryReport {
  std::vector<RecoveryRecord> records;   // sorted by (setting, method, module, seed)
  std::vector<AccuracyCell> cells;
  std::vector<double> thresholds;
  std::vector<CurvePoint> curve;         // over all scored records

  bool operator==(const RecoveryReport&) const = default;
};

// True iff the stem of any ground-truth or synonym token occurs among the
// predicted tokens' stems, or the predicted text equals a synonym verbatim.
bool match_explanation(const std::string& predicted, const std::string& groundtruth_keyphrase,
                       const std::vector<std::string>& synonyms);

// Unmatched predictions that come close to the ground truth: a content stem
// of at least four letters shares a four-letter prefix with, or is contained
// in, a ground-truth or synonym stem (or the reverse).
bool is_near_miss(const std::string& predicted, const std::string& groundtruth_keyphrase,
                  const std::vector<std::string>& synonyms);

// Accuracy over scored (SASC) records with score >= t, for each threshold t.
// Throws NoScoredRecords if no record carries a score.
std::vector<CurvePoint> cumulative_accuracy_curve(const std::vector<RecoveryRecord>& records,
                                                  const std::vector<double>& thresholds);

// 0, 0.25, ..., 4.0
std::vector<double> default_curve_thresholds();

// Uniformly random permutation of [0, n) with no fixed points. n >= 2.
std::vector<std::size_t> seeded_derangement(std::size_t n, std::uint64_t seed);

// Cells and curve recomputed from the records (records get sorted).
RecoveryReport aggregate(std::vector<RecoveryRecord> records,
                         std::vector<double> thresholds = default_curve_thresholds());

struct RecoveryOptions {
  std::size_t workers = 4;
  std::vector<double> thresholds = default_curve_thresholds();
};

// One record per (module, seed). Failures become unmatched records with an
// error note. Default and restricted-corpus runs use zero noise; noisy-module
// runs use config.noise_sd_in_sigma_f, or 3 when it is unset.
RecoveryReport run_recovery(const std::vector<SyntheticRegistryEntry>& registry, Setting setting,
                            Method method, const std::vector<std::uint64_t>& seeds,
                            const ModuleScorer& scorer, const LlmClient& llm,
                            const ExplainConfig& config, const RecoveryOptions& options = {});

RecoveryReport merge_reports(const std::vector<RecoveryReport>& reports);

nlohmann::json to_json(const RecoveryReport& report);
RecoveryReport report_from_json(const nlohmann::json& doc);

// Merges {"record_id": similarity} scores into matching records.
std::size_t merge_similarity(RecoveryReport& report, const nlohmann::json& scores);

std::string table_csv(const RecoveryReport& report);
std::string curve_csv(const RecoveryReport& report);

enum class ReportFormat { Json, Csv, Both };

// Writes report.json and/or table.csv + curve.csv into dir (created if
// needed). Output is byte-stable for equal reports.
void emit_report(const RecoveryReport& report, const std::filesystem::path& dir,
                 ReportFormat format = ReportFormat::Both);

}  // namespace sasc
