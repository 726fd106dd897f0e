#ifndef KNNICL_DATASET_H_
#define KNNICL_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "knnicl/types.h"

namespace knnicl {

enum class FileFormat { kCsv, kJsonl };

// Column order of the on-disk schema. sectors/industries are |-separated in
// CSV; outcome is SUCCESS, FAILURE, or empty for unlabeled rows.
extern const std::vector<std::string> kDatasetColumns;

Dataset load_dataset(const std::filesystem::path& path, FileFormat format);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  FileFormat format);

FileFormat format_from_path(const std::filesystem::path& path);

// Replaces every case-insensitive whole-word occurrence of company_name in
// the description with the placeholder "this company". Idempotent; an empty
// name returns the input unchanged.
std::string redact_name(std::string_view description,
                        std::string_view company_name);

inline constexpr std::string_view kRedactionPlaceholder = "this company";

// One train/test partition of the labeled records.
struct SplitAssignment {
  int repetition_index = 0;
  std::set<std::string> train_ids;
  std::set<std::string> test_ids;
  std::uint64_t seed = 0;
};

// R independent class-stratified shuffle splits. Per-class train quotas use
// largest-remainder rounding against round(train_fraction * n); repetitions
// draw derived sub-seeds from `seed`.
std::vector<SplitAssignment> stratified_shuffle_splits(const Dataset& dataset,
                                                       int repetitions,
                                                       double train_fraction,
                                                       std::uint64_t seed);

struct SyntheticOptions {
  int n = 200;
  int embed_dim = 8;
  double separation = 6.0;
  std::uint64_t seed = 1;
  double positive_fraction = 0.35;
};

struct SyntheticData {
  Dataset dataset;
  // Ground-truth text coordinates per record id; the description field holds
  // the same values serialized as whitespace-separated numbers.
  std::map<std::string, std::vector<double>> embeddings;
};

// Desk-scale synthetic cohort: descriptions encode coordinates from two
// class-conditional Gaussian clusters whose means are `separation` apart,
// and structured features are correlated with the label.
SyntheticData generate_synthetic(const SyntheticOptions& options);

struct DatasetStats {
  std::size_t n = 0;
  std::size_t labeled = 0;
  std::size_t positives = 0;
  double positive_share = 0.0;
  std::size_t empty_descriptions = 0;
  double mean_age_months = 0.0;
  double linkedin_rate = 0.0;
};

DatasetStats describe(const Dataset& dataset);

std::string format_double(double value);
double parse_double(const std::string& text, const std::string& context);

}  // namespace knnicl

#endif  // KNNICL_DATASET_H_
