#ifndef KNNICL_REPORT_H_
#define KNNICL_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "knnicl/evaluation.h"

namespace knnicl {

inline constexpr std::string_view kToolVersion = "1.0.0";

// One evaluated (method, feature mode, k, alpha) cell of an experiment
// matrix together with its aggregate report.
struct ReportRow {
  std::string method;
  std::string feature_mode;
  int k = 0;
  double alpha = 0.0;
  MetricsReport report;
};

std::string decode_status_name(DecodeStatus status);

// Fixed-precision decimal rendering for tables ("0.713").
std::string format_fixed(double value, int precision);

nlohmann::json metrics_to_json(const MetricValues& values,
                               bool include_degenerate_flags);
nlohmann::json report_row_to_json(const ReportRow& row);

// Stable report document: rows in input order, object keys sorted by the
// JSON library, no timestamps. Equal inputs give byte-identical dumps.
nlohmann::json report_to_json(const std::vector<ReportRow>& rows);

// Aligned-column text tables: a summary over all rows, notes on decode
// retries and exclusions, then a per-sector table per row. Methods outside
// this artifact (random forest, XGBoost, neural nets) appear as labeled
// placeholder rows so the layout stays comparable with published tables.
std::string render_report_text(const std::vector<ReportRow>& rows);

// One JSONL line per prediction: repetition, target id, method, k, shot ids
// in prompt order, raw response, decoded label, truth, decode status.
void write_audit_log(const std::filesystem::path& path,
                     const std::vector<ReportRow>& rows);

// One JSONL line per ranked candidate, present only for rows that ran with
// ranking dumps enabled.
void write_ranking_log(const std::filesystem::path& path,
                       const std::vector<ReportRow>& rows);

// Run provenance. Everything determinism-relevant lives under "inputs"; the
// creation timestamp sits beside it, so equal-input reruns agree on the
// inputs block even though the manifests were written at different times.
nlohmann::json make_manifest(const nlohmann::json& config_snapshot,
                             const std::string& dataset_digest,
                             std::uint64_t seed, const std::string& backend_id,
                             const std::string& embedder_id);

void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& value);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace knnicl

#endif  // KNNICL_REPORT_H_
