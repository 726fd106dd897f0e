#include "knnicl/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "knnicl/dataset.h"
#include "knnicl/digest.h"

namespace knnicl {
namespace {

using nlohmann::json;

double l2_norm(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

void require_finite(const std::vector<double>& v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw ValidationError(what + " contains a non-finite entry");
    }
  }
}

std::vector<double> numeric_features(const StartupRecord& r) {
  return {r.age_months,
          static_cast<double>(r.has_email),
          static_cast<double>(r.has_linkedin),
          static_cast<double>(r.founders_count),
          static_cast<double>(r.founders_country_count),
          static_cast<double>(r.founders_male_count),
          static_cast<double>(r.founders_female_count),
          static_cast<double>(r.founders_degree_count_total)};
}

}  // namespace

const std::vector<std::string> kNumericFeatureNames = {
    "age_months",
    "has_email",
    "has_linkedin",
    "founders_count",
    "founders_country_count",
    "founders_male_count",
    "founders_female_count",
    "founders_degree_count_total",
};

std::string ScalerParams::fingerprint() const {
  std::string blob;
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    blob += feature_names[i];
    blob.push_back('=');
    blob += format_double(mean[i]);
    blob.push_back('/');
    blob += format_double(std[i]);
    blob.push_back('\n');
  }
  return sha256_hex(blob);
}

std::vector<double> raw_feature_vector(const StartupRecord& record,
                                       const std::vector<std::string>& vocab) {
  std::vector<double> out = numeric_features(record);
  out.resize(out.size() + vocab.size(), 0.0);
  const std::size_t base = kNumericFeatureNames.size();
  for (const std::string& sector : record.sectors) {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), sector);
    if (it != vocab.end() && *it == sector) {
      out[base + static_cast<std::size_t>(it - vocab.begin())] = 1.0;
    }
  }
  return out;
}

ScalerParams fit_scaler(
    const std::vector<const StartupRecord*>& train_records) {
  if (train_records.empty()) {
    throw ValidationError("cannot fit a scaler on an empty training set");
  }
  std::set<std::string> sectors;
  for (const StartupRecord* r : train_records) {
    sectors.insert(r->sectors.begin(), r->sectors.end());
  }
  ScalerParams params;
  params.sector_vocab.assign(sectors.begin(), sectors.end());
  params.feature_names = kNumericFeatureNames;
  for (const std::string& sector : params.sector_vocab) {
    params.feature_names.push_back("sector:" + sector);
  }

  const std::size_t dim = params.feature_names.size();
  const auto n = static_cast<double>(train_records.size());
  params.mean.assign(dim, 0.0);
  params.std.assign(dim, 0.0);
  std::vector<std::vector<double>> rows;
  rows.reserve(train_records.size());
  for (const StartupRecord* r : train_records) {
    rows.push_back(raw_feature_vector(*r, params.sector_vocab));
    for (std::size_t j = 0; j < dim; ++j) params.mean[j] += rows.back()[j];
  }
  for (std::size_t j = 0; j < dim; ++j) params.mean[j] /= n;
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < dim; ++j) {
      double d = row[j] - params.mean[j];
      params.std[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    params.std[j] = std::max(std::sqrt(params.std[j] / n), kStdFloor);
  }
  return params;
}

std::vector<double> apply_scaler(const ScalerParams& params,
                                 const StartupRecord& record) {
  if (params.mean.size() != params.dimension() ||
      params.std.size() != params.dimension()) {
    throw ValidationError("scaler parameters have inconsistent dimensions");
  }
  std::vector<double> out = raw_feature_vector(record, params.sector_vocab);
  if (out.size() != params.dimension()) {
    throw ValidationError("record feature dimension " +
                          std::to_string(out.size()) +
                          " does not match scaler dimension " +
                          std::to_string(params.dimension()));
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = (out[j] - params.mean[j]) / params.std[j];
  }
  return out;
}

std::vector<double> FusedVector::structured_block() const {
  return {values.begin(),
          values.begin() + static_cast<std::ptrdiff_t>(structured_dim)};
}

std::vector<double> FusedVector::text_block() const {
  return {values.begin() + static_cast<std::ptrdiff_t>(structured_dim),
          values.end()};
}

FusedVector fuse(const std::vector<double>& structured,
                 const Embedding& embedding, double alpha) {
  if (!(alpha > 0.0)) {
    throw ValidationError("alpha must be positive, got " +
                          format_double(alpha));
  }
  require_finite(structured, "structured feature vector");
  require_finite(embedding.values, "text embedding");
  const double text_norm = l2_norm(embedding.values);
  if (text_norm == 0.0) {
    throw ValidationError(
        "zero-norm text embedding" +
        (embedding.source.empty() ? std::string()
                                  : " from \"" + embedding.source + "\"") +
        "; refusing to fuse (embedder likely broken)");
  }
  const double structured_norm = l2_norm(structured);
  FusedVector fused;
  fused.structured_dim = structured.size();
  fused.alpha = alpha;
  fused.values.reserve(structured.size() + embedding.values.size());
  if (structured_norm == 0.0) {
    fused.values = structured;
  } else {
    const double scale = alpha * text_norm / structured_norm;
    for (double x : structured) fused.values.push_back(x * scale);
  }
  fused.values.insert(fused.values.end(), embedding.values.begin(),
                      embedding.values.end());
  return fused;
}

FusedVector fused_structured_only(const std::vector<double>& structured) {
  require_finite(structured, "structured feature vector");
  FusedVector fused;
  fused.values = structured;
  fused.structured_dim = structured.size();
  return fused;
}

FusedVector fused_text_only(const Embedding& embedding) {
  require_finite(embedding.values, "text embedding");
  FusedVector fused;
  fused.values = embedding.values;
  fused.structured_dim = 0;
  return fused;
}

void save_fused_table(const FusedTableFile& table,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw RuntimeFailure("cannot open \"" + path.string() + "\" for writing");
  }
  json header;
  header["m"] = table.structured_dim;
  header["d"] = table.text_dim;
  header["alpha"] = table.alpha;
  header["embedder"] = table.embedder_id;
  header["scaler_fingerprint"] = table.scaler_fingerprint;
  out << header.dump() << '\n';
  for (const auto& [id, fused] : table.vectors) {
    json line;
    line["id"] = id;
    line["values"] = fused.values;
    out << line.dump() << '\n';
  }
  if (!out) {
    throw RuntimeFailure("failed writing fused vectors to \"" +
                         path.string() + "\"");
  }
}

FusedTableFile load_fused_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open fused-vector file \"" + path.string() +
                          "\"");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(path.string() + ": missing header line");
  }
  FusedTableFile table;
  try {
    json header = json::parse(line);
    table.structured_dim = header.at("m").get<std::size_t>();
    table.text_dim = header.at("d").get<std::size_t>();
    table.alpha = header.at("alpha").get<double>();
    table.embedder_id = header.at("embedder").get<std::string>();
    table.scaler_fingerprint =
        header.at("scaler_fingerprint").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": invalid header (" +
                          std::string(e.what()) + ")");
  }
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      json entry = json::parse(line);
      std::string id = entry.at("id").get<std::string>();
      FusedVector fused;
      fused.values = entry.at("values").get<std::vector<double>>();
      fused.structured_dim = table.structured_dim;
      fused.alpha = table.alpha;
      if (fused.values.size() != table.structured_dim + table.text_dim) {
        throw ValidationError(
            path.string() + ": line " + std::to_string(line_number) +
            ": vector for \"" + id + "\" has dimension " +
            std::to_string(fused.values.size()) + ", header implies " +
            std::to_string(table.structured_dim + table.text_dim));
      }
      if (!table.vectors.emplace(id, std::move(fused)).second) {
        throw ValidationError(path.string() + ": duplicate id \"" + id +
                              "\" at line " + std::to_string(line_number));
      }
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ": line " +
                            std::to_string(line_number) + ": " +
                            std::string(e.what()));
    }
  }
  return table;
}

}  // namespace knnicl
