#include "knnicl/dataset.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "knnicl/csv.h"
#include "knnicl/rng.h"

namespace knnicl {
namespace {

using nlohmann::json;

long long parse_int(const std::string& text, const std::string& context) {
  long long value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ValidationError(context + ": expected an integer, got \"" + text +
                          "\"");
  }
  return value;
}

// Splits a |-separated token list. Empty input yields an empty set; empty
// tokens inside a non-empty list are rejected.
std::set<std::string> split_tokens(const std::string& text,
                                   const std::string& context) {
  std::set<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t bar = text.find('|', start);
    std::string token = text.substr(
        start, bar == std::string::npos ? std::string::npos : bar - start);
    if (token.empty()) {
      throw ValidationError(context + ": empty token in \"" + text + "\"");
    }
    out.insert(std::move(token));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return out;
}

std::string join_tokens(const std::set<std::string>& tokens) {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out.push_back('|');
    out += token;
  }
  return out;
}

int parse_flag(const std::string& text, const std::string& context) {
  if (text == "0") return 0;
  if (text == "1") return 1;
  throw ValidationError(context + ": expected 0 or 1, got \"" + text + "\"");
}

int parse_count(const std::string& text, const std::string& context) {
  long long value = parse_int(text, context);
  if (value < 0) {
    throw ValidationError(context + ": must be non-negative, got " + text);
  }
  if (value > 1'000'000) {
    throw ValidationError(context + ": implausibly large value " + text);
  }
  return static_cast<int>(value);
}

std::optional<Outcome> parse_outcome(const std::string& text,
                                     const std::string& context) {
  if (text.empty()) return std::nullopt;
  std::optional<Outcome> outcome = outcome_from_token(text);
  if (!outcome.has_value()) {
    throw ValidationError(context + ": unknown outcome token \"" + text +
                          "\" (expected SUCCESS, FAILURE, or empty)");
  }
  return outcome;
}

StartupRecord record_from_fields(const std::vector<std::string>& fields,
                                 std::size_t line) {
  const std::string where = "line " + std::to_string(line);
  StartupRecord r;
  r.id = fields[0];
  if (r.id.empty()) throw ValidationError(where + ": empty id");
  r.age_months = parse_double(fields[1], where + ", age_months");
  if (r.age_months < 0) {
    throw ValidationError(where + ": age_months must be non-negative, got " +
                          fields[1]);
  }
  r.has_email = parse_flag(fields[2], where + ", has_email");
  r.has_linkedin = parse_flag(fields[3], where + ", has_linkedin");
  r.founders_count = parse_count(fields[4], where + ", founders_count");
  r.founders_country_count =
      parse_count(fields[5], where + ", founders_country_count");
  r.founders_male_count =
      parse_count(fields[6], where + ", founders_male_count");
  r.founders_female_count =
      parse_count(fields[7], where + ", founders_female_count");
  r.founders_degree_count_total =
      parse_count(fields[8], where + ", founders_degree_count_total");
  r.sectors = split_tokens(fields[9], where + ", sectors");
  r.industries = split_tokens(fields[10], where + ", industries");
  r.description = fields[11];
  r.outcome = parse_outcome(fields[12], where + ", outcome");
  return r;
}

Dataset load_csv(std::istream& in, const std::string& origin) {
  std::vector<CsvRow> rows = read_csv(in);
  if (rows.empty()) {
    throw ValidationError(origin + ": missing header row");
  }
  if (rows.front().fields != kDatasetColumns) {
    std::string got;
    for (const auto& f : rows.front().fields) {
      if (!got.empty()) got.push_back(',');
      got += f;
    }
    throw ValidationError(origin + ": unexpected header \"" + got + "\"");
  }
  std::vector<StartupRecord> records;
  std::map<std::string, std::size_t> first_line;
  std::vector<std::string> problems;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& row = rows[i];
    try {
      if (row.fields.size() != kDatasetColumns.size()) {
        throw ValidationError("line " + std::to_string(row.line) +
                              ": expected " +
                              std::to_string(kDatasetColumns.size()) +
                              " fields, got " +
                              std::to_string(row.fields.size()));
      }
      StartupRecord record = record_from_fields(row.fields, row.line);
      auto [it, inserted] = first_line.emplace(record.id, row.line);
      if (!inserted) {
        throw ValidationError("duplicate record id \"" + record.id +
                              "\" (lines " + std::to_string(it->second) +
                              " and " + std::to_string(row.line) + ")");
      }
      records.push_back(std::move(record));
    } catch (const ValidationError& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string message = origin + ": " +
                          std::to_string(problems.size()) + " invalid row(s)";
    for (const auto& p : problems) {
      message += "\n  ";
      message += p;
    }
    throw ValidationError(message);
  }
  return Dataset(std::move(records));
}

const json& require_key(const json& object, const char* key,
                        const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw ValidationError(where + ": missing key \"" + std::string(key) +
                          "\"");
  }
  return *it;
}

std::string json_string(const json& object, const char* key,
                        const std::string& where) {
  const json& value = require_key(object, key, where);
  if (!value.is_string()) {
    throw ValidationError(where + ", " + key + ": expected a string");
  }
  return value.get<std::string>();
}

int json_flag(const json& object, const char* key, const std::string& where) {
  const json& value = require_key(object, key, where);
  if (value.is_number_integer()) {
    long long v = value.get<long long>();
    if (v == 0 || v == 1) return static_cast<int>(v);
  }
  throw ValidationError(where + ", " + key + ": expected 0 or 1");
}

int json_count(const json& object, const char* key, const std::string& where) {
  const json& value = require_key(object, key, where);
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ValidationError(where + ", " + key +
                          ": expected a non-negative integer");
  }
  return static_cast<int>(value.get<long long>());
}

std::set<std::string> json_tokens(const json& object, const char* key,
                                  const std::string& where) {
  const json& value = require_key(object, key, where);
  if (!value.is_array()) {
    throw ValidationError(where + ", " + key +
                          ": expected an array of strings");
  }
  std::set<std::string> out;
  for (const json& item : value) {
    if (!item.is_string() || item.get<std::string>().empty()) {
      throw ValidationError(where + ", " + key +
                            ": expected non-empty string entries");
    }
    out.insert(item.get<std::string>());
  }
  return out;
}

Dataset load_jsonl(std::istream& in, const std::string& origin) {
  std::vector<StartupRecord> records;
  std::map<std::string, std::size_t> first_line;
  std::vector<std::string> problems;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_number);
    try {
      json object;
      try {
        object = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ValidationError(where + ": invalid JSON (" +
                              std::string(e.what()) + ")");
      }
      if (!object.is_object()) {
        throw ValidationError(where + ": expected a JSON object");
      }
      for (const auto& item : object.items()) {
        if (std::find(kDatasetColumns.begin(), kDatasetColumns.end(),
                      item.key()) == kDatasetColumns.end()) {
          throw ValidationError(where + ": unexpected key \"" + item.key() +
                                "\"");
        }
      }
      StartupRecord r;
      r.id = json_string(object, "id", where);
      if (r.id.empty()) throw ValidationError(where + ": empty id");
      const json& age = require_key(object, "age_months", where);
      if (!age.is_number()) {
        throw ValidationError(where + ", age_months: expected a number");
      }
      r.age_months = age.get<double>();
      if (!std::isfinite(r.age_months) || r.age_months < 0) {
        throw ValidationError(where +
                              ", age_months: must be finite and non-negative");
      }
      r.has_email = json_flag(object, "has_email", where);
      r.has_linkedin = json_flag(object, "has_linkedin", where);
      r.founders_count = json_count(object, "founders_count", where);
      r.founders_country_count =
          json_count(object, "founders_country_count", where);
      r.founders_male_count = json_count(object, "founders_male_count", where);
      r.founders_female_count =
          json_count(object, "founders_female_count", where);
      r.founders_degree_count_total =
          json_count(object, "founders_degree_count_total", where);
      r.sectors = json_tokens(object, "sectors", where);
      r.industries = json_tokens(object, "industries", where);
      r.description = json_string(object, "description", where);
      const json& outcome = require_key(object, "outcome", where);
      if (outcome.is_null()) {
        r.outcome = std::nullopt;
      } else if (outcome.is_string()) {
        r.outcome = parse_outcome(outcome.get<std::string>(), where);
      } else {
        throw ValidationError(where + ", outcome: expected a string or null");
      }
      auto [it, inserted] = first_line.emplace(r.id, line_number);
      if (!inserted) {
        throw ValidationError("duplicate record id \"" + r.id + "\" (lines " +
                              std::to_string(it->second) + " and " +
                              std::to_string(line_number) + ")");
      }
      records.push_back(std::move(r));
    } catch (const ValidationError& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string message = origin + ": " +
                          std::to_string(problems.size()) + " invalid row(s)";
    for (const auto& p : problems) {
      message += "\n  ";
      message += p;
    }
    throw ValidationError(message);
  }
  return Dataset(std::move(records));
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

char ascii_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

// Case-insensitive (ASCII) whole-word match of `needle` at `pos`.
bool word_match_at(std::string_view text, std::size_t pos,
                   std::string_view needle) {
  if (needle.empty() || pos + needle.size() > text.size()) return false;
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (ascii_lower(text[pos + i]) != ascii_lower(needle[i])) return false;
  }
  if (pos > 0 && is_word_char(text[pos - 1]) && is_word_char(needle.front())) {
    return false;
  }
  std::size_t end = pos + needle.size();
  if (end < text.size() && is_word_char(text[end]) &&
      is_word_char(needle.back())) {
    return false;
  }
  return true;
}

}  // namespace

const std::vector<std::string> kDatasetColumns = {
    "id",
    "age_months",
    "has_email",
    "has_linkedin",
    "founders_count",
    "founders_country_count",
    "founders_male_count",
    "founders_female_count",
    "founders_degree_count_total",
    "sectors",
    "industries",
    "description",
    "outcome",
};

std::string format_double(double value) {
  std::array<char, 64> buffer;
  auto [ptr, ec] =
      std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) {
    throw RuntimeFailure("failed to format a floating-point value");
  }
  return std::string(buffer.data(), ptr);
}

double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ValidationError(context + ": expected a number, got \"" + text +
                          "\"");
  }
  if (!std::isfinite(value)) {
    throw ValidationError(context + ": value must be finite, got \"" + text +
                          "\"");
  }
  return value;
}

FileFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ascii_lower);
  if (ext == ".csv") return FileFormat::kCsv;
  if (ext == ".jsonl" || ext == ".ndjson") return FileFormat::kJsonl;
  throw ValidationError("cannot infer file format from \"" + path.string() +
                        "\" (expected .csv or .jsonl)");
}

Dataset load_dataset(const std::filesystem::path& path, FileFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open dataset file \"" + path.string() +
                          "\"");
  }
  return format == FileFormat::kCsv ? load_csv(in, path.string())
                                    : load_jsonl(in, path.string());
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  FileFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw RuntimeFailure("cannot open \"" + path.string() + "\" for writing");
  }
  if (format == FileFormat::kCsv) {
    write_csv_row(out, kDatasetColumns);
    for (const StartupRecord& r : dataset.records()) {
      write_csv_row(
          out,
          {r.id, format_double(r.age_months), std::to_string(r.has_email),
           std::to_string(r.has_linkedin), std::to_string(r.founders_count),
           std::to_string(r.founders_country_count),
           std::to_string(r.founders_male_count),
           std::to_string(r.founders_female_count),
           std::to_string(r.founders_degree_count_total),
           join_tokens(r.sectors), join_tokens(r.industries), r.description,
           r.outcome.has_value() ? to_string(*r.outcome) : ""});
    }
  } else {
    for (const StartupRecord& r : dataset.records()) {
      json object;
      object["id"] = r.id;
      object["age_months"] = r.age_months;
      object["has_email"] = r.has_email;
      object["has_linkedin"] = r.has_linkedin;
      object["founders_count"] = r.founders_count;
      object["founders_country_count"] = r.founders_country_count;
      object["founders_male_count"] = r.founders_male_count;
      object["founders_female_count"] = r.founders_female_count;
      object["founders_degree_count_total"] = r.founders_degree_count_total;
      object["sectors"] = r.sectors;
      object["industries"] = r.industries;
      object["description"] = r.description;
      if (r.outcome.has_value()) {
        object["outcome"] = to_string(*r.outcome);
      } else {
        object["outcome"] = nullptr;
      }
      out << object.dump() << '\n';
    }
  }
  if (!out) {
    throw RuntimeFailure("failed writing dataset to \"" + path.string() +
                         "\"");
  }
}

std::string redact_name(std::string_view description,
                        std::string_view company_name) {
  if (company_name.empty()) return std::string(description);
  std::string out;
  out.reserve(description.size());
  std::size_t i = 0;
  while (i < description.size()) {
    // Keep existing placeholders verbatim so a second pass is a no-op even
    // when company_name is a substring of the placeholder itself.
    if (word_match_at(description, i, kRedactionPlaceholder)) {
      out += description.substr(i, kRedactionPlaceholder.size());
      i += kRedactionPlaceholder.size();
      continue;
    }
    if (word_match_at(description, i, company_name)) {
      out += kRedactionPlaceholder;
      i += company_name.size();
      continue;
    }
    out.push_back(description[i]);
    ++i;
  }
  return out;
}

std::vector<SplitAssignment> stratified_shuffle_splits(const Dataset& dataset,
                                                       int repetitions,
                                                       double train_fraction,
                                                       std::uint64_t seed) {
  if (repetitions < 1) {
    throw ValidationError("repetitions must be at least 1, got " +
                          std::to_string(repetitions));
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::string>, 2> by_class;
  for (const StartupRecord& r : dataset.records()) {
    if (r.labeled()) {
      by_class[static_cast<int>(*r.outcome)].push_back(r.id);
    }
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < 2) {
      throw ValidationError(
          "cannot stratify: class " + to_string(static_cast<Outcome>(c)) +
          " has " + std::to_string(by_class[c].size()) +
          " labeled record(s), need at least 2");
    }
  }
  const std::size_t n = by_class[0].size() + by_class[1].size();
  const auto total_train =
      static_cast<std::size_t>(std::llround(train_fraction * n));

  // Largest-remainder quotas: floor each class share, then hand out the
  // remaining seats by descending fractional remainder.
  std::array<std::size_t, 2> quota;
  std::array<double, 2> remainder;
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    double exact = train_fraction * by_class[c].size();
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  std::array<int, 2> order = {0, 1};
  if (remainder[1] > remainder[0]) order = {1, 0};
  std::size_t leftover = total_train > assigned ? total_train - assigned : 0;
  for (std::size_t j = 0; j < leftover; ++j) {
    int c = order[j % 2];
    if (quota[c] < by_class[c].size()) {
      ++quota[c];
    } else {
      ++quota[order[(j + 1) % 2]];
    }
  }

  std::vector<SplitAssignment> splits;
  splits.reserve(static_cast<std::size_t>(repetitions));
  for (int r = 0; r < repetitions; ++r) {
    SplitAssignment split;
    split.repetition_index = r;
    split.seed = derive_seed(seed, "repetition", r);
    Rng rng(split.seed);
    for (int c = 0; c < 2; ++c) {
      std::vector<std::string> ids = by_class[c];
      rng.shuffle(ids);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i < quota[c]) {
          split.train_ids.insert(std::move(ids[i]));
        } else {
          split.test_ids.insert(std::move(ids[i]));
        }
      }
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

namespace {

struct SectorProfile {
  const char* name;
  double weight;
  std::array<const char*, 4> industries;
};

// Sector mix loosely follows the relative frequencies observed in real startup
// cohorts; weights are in percent and need not sum to 100.
constexpr std::array<SectorProfile, 11> kSectorProfiles = {{
    {"Information Technology",
     55.4,
     {"software", "saas", "cloud services", "data analytics"}},
    {"Communication Services",
     47.9,
     {"media", "telecom", "social platforms", "advertising"}},
    {"Consumer Discretionary",
     30.4,
     {"e-commerce", "retail", "travel", "consumer apps"}},
    {"Industrials",
     29.7,
     {"logistics", "manufacturing", "robotics", "supply chain"}},
    {"Health Care",
     16.4,
     {"biotech", "medical devices", "digital health", "diagnostics"}},
    {"Financials", 9.5, {"fintech", "payments", "lending", "insurance"}},
    {"Consumer Staples",
     8.3,
     {"food and beverage", "personal care", "grocery", "packaged goods"}},
    {"Real Estate",
     6.0,
     {"proptech", "property management", "construction tech",
      "real estate services"}},
    {"Energy",
     2.3,
     {"clean energy", "energy storage", "solar", "oil and gas services"}},
    {"Utilities",
     2.2,
     {"water services", "grid technology", "waste management",
      "power distribution"}},
    {"Materials",
     1.5,
     {"advanced materials", "chemicals", "packaging", "mining tech"}},
}};

std::size_t weighted_sector_index(Rng& rng) {
  double total = 0.0;
  for (const SectorProfile& p : kSectorProfiles) total += p.weight;
  double draw = rng.next_double() * total;
  for (std::size_t i = 0; i < kSectorProfiles.size(); ++i) {
    draw -= kSectorProfiles[i].weight;
    if (draw < 0.0) return i;
  }
  return kSectorProfiles.size() - 1;
}

int clip_round(double value, int lo, int hi) {
  int v = static_cast<int>(std::llround(value));
  return std::clamp(v, lo, hi);
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticOptions& options) {
  if (options.n < 4) {
    throw ValidationError("synthetic dataset needs n >= 4, got " +
                          std::to_string(options.n));
  }
  if (options.embed_dim < 1) {
    throw ValidationError("embed_dim must be at least 1");
  }
  if (options.separation < 0.0) {
    throw ValidationError("separation must be non-negative");
  }
  if (!(options.positive_fraction > 0.0 && options.positive_fraction < 1.0)) {
    throw ValidationError(
        "positive_fraction must lie strictly between 0 and 1");
  }
  const auto n = static_cast<std::size_t>(options.n);
  auto n_pos =
      static_cast<std::size_t>(std::llround(options.positive_fraction * n));
  n_pos = std::clamp<std::size_t>(n_pos, 1, n - 1);

  Rng rng(derive_seed(options.seed, "synthetic"));
  std::vector<int> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + n_pos, 1);
  rng.shuffle(labels);

  int id_width = 4;
  for (std::size_t v = n; v >= 10000; v /= 10) ++id_width;

  std::vector<StartupRecord> records;
  records.reserve(n);
  std::map<std::string, std::vector<double>> embeddings;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = labels[i] == 1;
    StartupRecord r;
    std::string digits = std::to_string(i + 1);
    r.id = "syn-" + std::string(id_width - digits.size(), '0') + digits;

    // Structured features are drawn from class-conditional distributions so
    // the label is partially recoverable from the structured block alone.
    double age = pos ? rng.next_normal(15.77, 9.88)
                     : rng.next_normal(19.57, 9.93);
    r.age_months = std::round(std::max(age, 0.0) * 100.0) / 100.0;
    r.has_email = rng.next_bernoulli(pos ? 0.81 : 0.75) ? 1 : 0;
    r.has_linkedin = rng.next_bernoulli(pos ? 0.86 : 0.64) ? 1 : 0;
    r.founders_count =
        clip_round(pos ? rng.next_normal(2.03, 1.0) : rng.next_normal(1.66, 1.0),
                   1, 6);
    r.founders_country_count = clip_round(
        pos ? rng.next_normal(1.23, 0.4) : rng.next_normal(1.15, 0.4), 1,
        r.founders_count);
    r.founders_female_count =
        rng.next_binomial(r.founders_count, pos ? 0.118 : 0.157);
    r.founders_male_count = r.founders_count - r.founders_female_count;
    r.founders_degree_count_total = clip_round(
        pos ? rng.next_normal(1.50, 1.4) : rng.next_normal(0.87, 1.4), 0, 8);

    // Sector membership is label-independent; 30% of records span two.
    std::size_t primary = weighted_sector_index(rng);
    r.sectors.insert(kSectorProfiles[primary].name);
    if (rng.next_bernoulli(0.3)) {
      std::size_t secondary = weighted_sector_index(rng);
      while (secondary == primary) secondary = weighted_sector_index(rng);
      r.sectors.insert(kSectorProfiles[secondary].name);
    }
    const auto& tags = kSectorProfiles[primary].industries;
    std::size_t tag_count = 1 + rng.next_below(3);
    std::vector<std::size_t> tag_order = {0, 1, 2, 3};
    rng.shuffle(tag_order);
    for (std::size_t t = 0; t < tag_count; ++t) {
      r.industries.insert(tags[tag_order[t]]);
    }

    // The description serializes the ground-truth text coordinates: two
    // unit-variance Gaussian clusters separated along the first axis.
    std::vector<double> coords(static_cast<std::size_t>(options.embed_dim));
    double offset = (pos ? 0.5 : -0.5) * options.separation;
    for (std::size_t d = 0; d < coords.size(); ++d) {
      coords[d] = rng.next_normal(d == 0 ? offset : 0.0, 1.0);
    }
    std::string description;
    for (std::size_t d = 0; d < coords.size(); ++d) {
      if (d > 0) description.push_back(' ');
      description += format_double(coords[d]);
    }
    r.description = std::move(description);
    r.outcome = pos ? Outcome::kSuccess : Outcome::kFailure;
    embeddings.emplace(r.id, std::move(coords));
    records.push_back(std::move(r));
  }
  return SyntheticData{Dataset(std::move(records)), std::move(embeddings)};
}

DatasetStats describe(const Dataset& dataset) {
  DatasetStats stats;
  stats.n = dataset.size();
  double age_sum = 0.0;
  std::size_t linkedin = 0;
  for (const StartupRecord& r : dataset.records()) {
    if (r.labeled()) {
      ++stats.labeled;
      if (*r.outcome == Outcome::kSuccess) ++stats.positives;
    }
    if (r.description.empty()) ++stats.empty_descriptions;
    age_sum += r.age_months;
    linkedin += static_cast<std::size_t>(r.has_linkedin);
  }
  if (stats.labeled > 0) {
    stats.positive_share =
        static_cast<double>(stats.positives) / stats.labeled;
  }
  if (stats.n > 0) {
    stats.mean_age_months = age_sum / stats.n;
    stats.linkedin_rate = static_cast<double>(linkedin) / stats.n;
  }
  return stats;
}

}  // namespace knnicl
