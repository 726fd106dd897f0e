#ifndef KNNICL_FEATURES_H_
#define KNNICL_FEATURES_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "knnicl/types.h"

namespace knnicl {

// Standard deviations below this are floored so constant columns standardize
// to zero instead of dividing by zero.
inline constexpr double kStdFloor = 1e-8;

// The eight numeric columns, in schema order. Sector one-hot indicators are
// appended after these when a scaler is fitted.
extern const std::vector<std::string> kNumericFeatureNames;

// Per-column standardization parameters plus the sector vocabulary observed
// while fitting. Immutable once fitted.
struct ScalerParams {
  std::vector<std::string> feature_names;
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<std::string> sector_vocab;  // sorted, duplicates removed

  std::size_t dimension() const { return feature_names.size(); }

  // Content digest of names and statistics. Two scalers fitted on different
  // row sets almost surely differ, which makes train-only fitting auditable.
  std::string fingerprint() const;
};

// Fits mean and population standard deviation (floored at kStdFloor) over the
// given rows only. The sector vocabulary is the sorted set of sectors seen in
// these rows; sectors first appearing elsewhere get no column.
ScalerParams fit_scaler(const std::vector<const StartupRecord*>& train_records);

// Raw (unstandardized) feature vector: numerics followed by one-hot sector
// indicators for the given vocabulary. Unknown sectors contribute nothing.
std::vector<double> raw_feature_vector(const StartupRecord& record,
                                       const std::vector<std::string>& vocab);

// (value - mean) / std per column, one-hots included.
std::vector<double> apply_scaler(const ScalerParams& params,
                                 const StartupRecord& record);

struct Embedding {
  std::vector<double> values;
  std::string source;  // embedder identifier

  std::size_t dim() const { return values.size(); }
};

// Concatenation [structured; text] with the structured block rescaled so that
// its L2 norm equals alpha times the text block's norm.
struct FusedVector {
  std::vector<double> values;
  std::size_t structured_dim = 0;
  double alpha = 1.0;

  std::vector<double> structured_block() const;
  std::vector<double> text_block() const;
  std::size_t text_dim() const { return values.size() - structured_dim; }
};

// Rescales `structured` to alpha * ||embedding|| / ||structured|| and appends
// the raw embedding. A zero-norm structured block passes through unchanged;
// a zero-norm embedding aborts (it signals a broken embedder).
FusedVector fuse(const std::vector<double>& structured,
                 const Embedding& embedding, double alpha);

// Degenerate carriers for the single-block ablations: the vector participates
// in retrieval as-is, with no rescaling applied.
FusedVector fused_structured_only(const std::vector<double>& structured);
FusedVector fused_text_only(const Embedding& embedding);

using FusedTable = std::map<std::string, FusedVector>;

// Sidecar file for precomputed fused vectors: a JSONL header line carrying
// m, d, alpha, embedder id, and scaler fingerprint, then one line per record.
struct FusedTableFile {
  std::size_t structured_dim = 0;
  std::size_t text_dim = 0;
  double alpha = 1.0;
  std::string embedder_id;
  std::string scaler_fingerprint;
  FusedTable vectors;
};

void save_fused_table(const FusedTableFile& table,
                      const std::filesystem::path& path);
FusedTableFile load_fused_table(const std::filesystem::path& path);

}  // namespace knnicl

#endif  // KNNICL_FEATURES_H_
