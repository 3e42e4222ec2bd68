#include <fstream>
#include <sstream>

#include "sasc/errors.hpp"
#include "sasc/eval.hpp"
#include "sasc/format.hpp"

namespace sasc {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << content;
  if (!out) throw Error("write failed: " + p.string());
}

}  // namespace

json to_json(const RecoveryReport& report) {
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back({{"id", r.record_id()},
                       {"module", r.module},
                       {"setting", to_string(r.setting)},
                       {"method", to_string(r.method)},
                       {"seed", r.seed},
                       {"corpus", r.corpus},
                       {"predicted", r.predicted},
                       {"groundtruth", r.groundtruth},
                       {"matched", r.matched},
                       {"needs_review", r.needs_review},
                       {"score_sigma", opt(r.score_sigma)},
                       {"error", opt(r.error)},
                       {"similarity", opt(r.similarity)}});
  }
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"setting", to_string(c.setting)},
                     {"method", to_string(c.method)},
                     {"n", c.n},
                     {"matched", c.matched},
                     {"accuracy", c.accuracy},
                     {"sem", c.sem}});
  }
  json points = json::array();
  for (const auto& p : report.curve) {
    points.push_back({{"threshold", p.threshold}, {"accuracy", opt(p.accuracy)}, {"n", p.n}});
  }
  return {{"schema_version", std::string(kReportSchema)},
          {"records", std::move(records)},
          {"cells", std::move(cells)},
          {"curve", {{"thresholds", report.thresholds}, {"points", std::move(points)}}}};
}

RecoveryReport report_from_json(const json& doc) {
  if (doc.value("schema_version", std::string{}) != kReportSchema)
    throw ConfigError("unsupported report schema");
  RecoveryReport report;
  try {
    for (const auto& j : doc.at("records")) {
      RecoveryRecord r;
      r.module = j.at("module").get<std::string>();
      r.setting = parse_setting(j.at("setting").get<std::string>());
      r.method = parse_method(j.at("method").get<std::string>());
      r.seed = j.at("seed").get<std::uint64_t>();
      r.corpus = j.value("corpus", std::string{});
      r.predicted = j.at("predicted").get<std::string>();
      r.groundtruth = j.at("groundtruth").get<std::string>();
      r.matched = j.at("matched").get<bool>();
      r.needs_review = j.value("needs_review", false);
      r.score_sigma = get_opt<double>(j, "score_sigma");
      r.error = get_opt<std::string>(j, "error");
      r.similarity = get_opt<double>(j, "similarity");
      report.records.push_back(std::move(r));
    }
    for (const auto& j : doc.at("cells")) {
      report.cells.push_back(AccuracyCell{parse_setting(j.at("setting").get<std::string>()),
                                          parse_method(j.at("method").get<std::string>()),
                                          j.at("n").get<std::size_t>(),
                                          j.at("matched").get<std::size_t>(),
                                          j.at("accuracy").get<double>(), j.at("sem").get<double>()});
    }
    const auto& curve = doc.at("curve");
    report.thresholds = curve.at("thresholds").get<std::vector<double>>();
    for (const auto& j : curve.at("points")) {
      report.curve.push_back(
          CurvePoint{j.at("threshold").get<double>(), get_opt<double>(j, "accuracy"),
                     j.at("n").get<std::size_t>()});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  return report;
}

std::size_t merge_similarity(RecoveryReport& report, const json& scores) {
  std::size_t merged = 0;
  for (auto& r : report.records) {
    const auto id = r.record_id();
    if (scores.contains(id) && scores.at(id).is_number()) {
      r.similarity = scores.at(id).get<double>();
      ++merged;
    }
  }
  return merged;
}

std::string table_csv(const RecoveryReport& report) {
  std::ostringstream os;
  os << "setting,method,accuracy,sem\n";
  for (const auto& c : report.cells) {
    os << to_string(c.setting) << ',' << to_string(c.method) << ',' << format_double(c.accuracy)
       << ',' << format_double(c.sem) << '\n';
  }
  return os.str();
}

std::string curve_csv(const RecoveryReport& report) {
  std::ostringstream os;
  os << "threshold,accuracy,n\n";
  for (const auto& p : report.curve) {
    os << format_double(p.threshold) << ',' << (p.accuracy ? format_double(*p.accuracy) : "")
       << ',' << p.n << '\n';
  }
  return os.str();
}

void emit_report(const RecoveryReport& report, const std::filesystem::path& dir,
                 ReportFormat format) {
  std::filesystem::create_directories(dir);
  if (format != ReportFormat::Csv) write_file(dir / "report.json", to_json(report).dump(2) + "\n");
  if (format != ReportFormat::Json) {
    write_file(dir / "table.csv", table_csv(report));
    write_file(dir / "curve.csv", curve_csv(report));
  }
}

}  // namespace sasc
