#include "knnicl/report.h"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <fstream>

namespace knnicl {
namespace {

enum class Align { kLeft, kRight };

// Pads cells so each column is as wide as its widest cell, two spaces apart.
std::string render_table(const std::vector<std::vector<std::string>>& cells,
                         const std::vector<Align>& aligns) {
  std::vector<std::size_t> widths(aligns.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::size_t pad = widths[c] - row[c].size();
      if (aligns[c] == Align::kRight) line.append(pad, ' ');
      line += row[c];
      if (c + 1 < row.size()) {
        if (aligns[c] == Align::kLeft) line.append(pad, ' ');
        line += "  ";
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  }
  return out;
}

std::string mean_std(const MetricValues& mean, const MetricValues& stddev,
                     double MetricValues::*field) {
  return format_fixed(mean.*field, 3) + " (" + format_fixed(stddev.*field, 3) +
         ")";
}

nlohmann::json counts_to_json(const ConfusionCounts& counts) {
  return nlohmann::json{{"tp", counts.tp},
                        {"fp", counts.fp},
                        {"tn", counts.tn},
                        {"fn", counts.fn}};
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw RuntimeFailure("cannot open \"" + path.string() + "\" for writing");
  }
  return out;
}

}  // namespace

std::string decode_status_name(DecodeStatus status) {
  switch (status) {
    case DecodeStatus::kClean:
      return "clean";
    case DecodeStatus::kFallback:
      return "fallback";
    case DecodeStatus::kError:
      return "error";
  }
  throw ValidationError("unknown decode status");
}

std::string format_fixed(double value, int precision) {
  char buffer[64];
  auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                              std::chars_format::fixed, precision);
  return std::string(buffer, result.ptr);
}

nlohmann::json metrics_to_json(const MetricValues& values,
                               bool include_degenerate_flags) {
  nlohmann::json out{{"balanced_accuracy", values.balanced_accuracy},
                     {"precision", values.precision},
                     {"recall", values.recall},
                     {"f1", values.f1}};
  if (include_degenerate_flags) {
    nlohmann::json flags = nlohmann::json::array();
    if (values.precision_degenerate) flags.push_back("precision");
    if (values.recall_degenerate) flags.push_back("recall");
    if (values.specificity_degenerate) flags.push_back("specificity");
    if (values.f1_degenerate) flags.push_back("f1");
    out["degenerate"] = std::move(flags);
  }
  return out;
}

nlohmann::json report_row_to_json(const ReportRow& row) {
  nlohmann::json splits = nlohmann::json::array();
  for (const SplitMetrics& split : row.report.splits) {
    splits.push_back(
        nlohmann::json{{"repetition", split.repetition},
                       {"counts", counts_to_json(split.counts)},
                       {"metrics", metrics_to_json(split.metrics, true)},
                       {"scaler_fingerprint", split.scaler_fingerprint},
                       {"decode_fallbacks", split.decode_fallbacks}});
  }
  nlohmann::json sectors = nlohmann::json::array();
  for (const SectorMetrics& sector : sector_breakdown(row.report.predictions)) {
    nlohmann::json entry{
        {"sector", sector.sector},
        {"counts", counts_to_json(sector.counts)},
        {"prediction_count", sector.prediction_count},
        {"relative_frequency", sector.relative_frequency}};
    entry["metrics"] = sector.metrics.has_value()
                           ? metrics_to_json(*sector.metrics, true)
                           : nlohmann::json(nullptr);
    sectors.push_back(std::move(entry));
  }
  return nlohmann::json{
      {"method", row.method},
      {"feature_mode", row.feature_mode},
      {"k", row.k},
      {"alpha", row.alpha},
      {"mean", metrics_to_json(row.report.mean, true)},
      {"stddev", metrics_to_json(row.report.stddev, false)},
      {"splits", std::move(splits)},
      {"sectors", std::move(sectors)},
      {"decode_retries", row.report.decode_retries},
      {"decode_fallbacks", row.report.decode_fallbacks},
      {"excluded_empty_description", row.report.excluded_empty_description}};
}

nlohmann::json report_to_json(const std::vector<ReportRow>& rows) {
  nlohmann::json out_rows = nlohmann::json::array();
  for (const ReportRow& row : rows) out_rows.push_back(report_row_to_json(row));
  return nlohmann::json{{"tool_version", std::string(kToolVersion)},
                        {"rows", std::move(out_rows)}};
}

std::string render_report_text(const std::vector<ReportRow>& rows) {
  std::string out = "Startup outcome prediction report\n";
  out += "=================================\n\n";

  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Method", "Mode", "k", "Alpha", "Bal.Acc.", "Precision",
                   "Recall", "F1"});
  for (const ReportRow& row : rows) {
    const bool shots = row.method != "zero_shot";
    cells.push_back(
        {row.method, row.feature_mode, shots ? std::to_string(row.k) : "-",
         row.feature_mode == "fused" ? format_fixed(row.alpha, 2) : "-",
         mean_std(row.report.mean, row.report.stddev,
                  &MetricValues::balanced_accuracy),
         mean_std(row.report.mean, row.report.stddev,
                  &MetricValues::precision),
         mean_std(row.report.mean, row.report.stddev, &MetricValues::recall),
         mean_std(row.report.mean, row.report.stddev, &MetricValues::f1)});
  }
  out += render_table(cells,
                      {Align::kLeft, Align::kLeft, Align::kRight, Align::kRight,
                       Align::kLeft, Align::kLeft, Align::kLeft, Align::kLeft});

  std::string notes;
  for (const ReportRow& row : rows) {
    if (row.report.decode_retries == 0 && row.report.decode_fallbacks == 0 &&
        row.report.excluded_empty_description == 0) {
      continue;
    }
    notes += "  " + row.method + " k=" + std::to_string(row.k) + ": " +
             std::to_string(row.report.decode_retries) + " decode retr" +
             (row.report.decode_retries == 1 ? "y" : "ies") + ", " +
             std::to_string(row.report.decode_fallbacks) + " fallback(s), " +
             std::to_string(row.report.excluded_empty_description) +
             " record(s) excluded for empty descriptions\n";
  }
  if (!notes.empty()) out += "\nNotes:\n" + notes;

  for (const ReportRow& row : rows) {
    std::vector<SectorMetrics> sectors =
        sector_breakdown(row.report.predictions);
    if (sectors.empty()) continue;
    out += "\nSector breakdown: " + row.method + " " + row.feature_mode +
           " k=" + std::to_string(row.k) + "\n";
    std::vector<std::vector<std::string>> sector_cells;
    sector_cells.push_back({"Sector", "Share", "Preds", "Bal.Acc.",
                            "Precision", "Recall", "F1"});
    for (const SectorMetrics& sector : sectors) {
      std::vector<std::string> line{
          sector.sector, format_fixed(sector.relative_frequency * 100.0, 1) + "%",
          std::to_string(sector.prediction_count)};
      if (sector.metrics.has_value()) {
        line.push_back(format_fixed(sector.metrics->balanced_accuracy, 3));
        line.push_back(format_fixed(sector.metrics->precision, 3));
        line.push_back(format_fixed(sector.metrics->recall, 3));
        line.push_back(format_fixed(sector.metrics->f1, 3));
      } else {
        line.push_back("(fewer than " +
                       std::to_string(kSectorMetricThreshold) +
                       " predictions)");
        line.push_back("-");
        line.push_back("-");
        line.push_back("-");
      }
      sector_cells.push_back(std::move(line));
    }
    out += render_table(sector_cells,
                        {Align::kLeft, Align::kRight, Align::kRight,
                         Align::kLeft, Align::kLeft, Align::kLeft,
                         Align::kLeft});
  }
  return out;
}

void write_audit_log(const std::filesystem::path& path,
                     const std::vector<ReportRow>& rows) {
  std::ofstream out = open_for_write(path);
  for (const ReportRow& row : rows) {
    for (const PredictionRecord& p : row.report.predictions) {
      nlohmann::json line{{"repetition", p.repetition},
                          {"target_id", p.target_id},
                          {"method", row.method},
                          {"k", row.k},
                          {"shot_ids", p.shot_ids},
                          {"raw_response", p.raw_response},
                          {"decoded", to_string(p.predicted)},
                          {"truth", to_string(p.truth)},
                          {"status", decode_status_name(p.status)}};
      out << line.dump() << '\n';
    }
  }
  if (!out) {
    throw RuntimeFailure("failed writing audit log \"" + path.string() + "\"");
  }
}

void write_ranking_log(const std::filesystem::path& path,
                       const std::vector<ReportRow>& rows) {
  std::ofstream out = open_for_write(path);
  for (const ReportRow& row : rows) {
    for (const RankingRecord& r : row.report.rankings) {
      nlohmann::json line{{"repetition", r.repetition},
                          {"target_id", r.target_id},
                          {"method", row.method},
                          {"k", row.k},
                          {"candidate_id", r.candidate_id},
                          {"score", r.score},
                          {"selected", r.selected}};
      out << line.dump() << '\n';
    }
  }
  if (!out) {
    throw RuntimeFailure("failed writing ranking log \"" + path.string() +
                         "\"");
  }
}

nlohmann::json make_manifest(const nlohmann::json& config_snapshot,
                             const std::string& dataset_digest,
                             std::uint64_t seed, const std::string& backend_id,
                             const std::string& embedder_id) {
  nlohmann::json inputs{{"config", config_snapshot},
                        {"dataset_digest", dataset_digest},
                        {"seed", seed},
                        {"backend", backend_id},
                        {"embedder", embedder_id},
                        {"tool_version", std::string(kToolVersion)}};
  return nlohmann::json{{"created_utc", utc_timestamp()},
                        {"inputs", std::move(inputs)}};
}

void write_json_file(const std::filesystem::path& path,
                     const nlohmann::json& value) {
  std::ofstream out = open_for_write(path);
  out << value.dump(2) << '\n';
  if (!out) {
    throw RuntimeFailure("failed writing \"" + path.string() + "\"");
  }
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out = open_for_write(path);
  out << content;
  if (!out) {
    throw RuntimeFailure("failed writing \"" + path.string() + "\"");
  }
}

}  // namespace knnicl
