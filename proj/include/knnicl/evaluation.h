#ifndef KNNICL_EVALUATION_H_
#define KNNICL_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "knnicl/backend.h"
#include "knnicl/baselines.h"
#include "knnicl/dataset.h"
#include "knnicl/prompting.h"
#include "knnicl/retrieval.h"
#include "knnicl/types.h"

namespace knnicl {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  void add(Outcome truth, Outcome predicted);
};

struct MetricValues {
  double balanced_accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the corresponding denominator was empty and the metric was
  // reported as 0 by convention.
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool specificity_degenerate = false;
  bool f1_degenerate = false;
};

// bal-acc = (TPR + TNR) / 2, precision = tp/(tp+fp), recall = tp/(tp+fn),
// F1 = harmonic mean of precision and recall. Empty denominators yield 0
// with the degenerate flag set; zero predictions is an error.
MetricValues compute_metrics(const ConfusionCounts& counts);

enum class Method { kKnnIcl, kVanillaIcl, kSectorIcl, kZeroShot, kLogReg };
enum class FeatureMode { kStructuredOnly, kTextOnly, kFused };

std::string to_string(Method method);
std::string to_string(FeatureMode mode);
Method method_from_string(const std::string& name);
FeatureMode feature_mode_from_string(const std::string& name);

struct ExperimentConfig {
  Method method = Method::kKnnIcl;
  int k = 10;
  double alpha = 0.5;
  FeatureMode feature_mode = FeatureMode::kFused;
  int repetitions = 5;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  TrainOptions logreg;
  InterleaveOrder interleave_order = InterleaveOrder::kStartFirst;
  int concurrency = 1;  // worker threads per split
  bool dump_rankings = false;
};

// Label access seam. The evaluation loop reads training labels while
// assembling pools and prompts, but a test target's label only after
// note_scoring_begin announces that its repetition moved to scoring. An
// access-tracking double can therefore prove the absence of test-label
// leakage.
class LabelStore {
 public:
  virtual ~LabelStore() = default;
  virtual std::optional<Outcome> get(const std::string& id) = 0;
  virtual void note_scoring_begin(int repetition) { (void)repetition; }
};

class DatasetLabelStore : public LabelStore {
 public:
  explicit DatasetLabelStore(const Dataset& dataset) : dataset_(dataset) {}
  std::optional<Outcome> get(const std::string& id) override;

 private:
  const Dataset& dataset_;
};

struct PredictionRecord {
  int repetition = 0;
  std::string target_id;
  std::vector<std::string> shot_ids;  // prompt order
  std::set<std::string> sectors;      // target's sectors
  std::string raw_response;
  DecodeStatus status = DecodeStatus::kClean;
  Outcome predicted = Outcome::kFailure;
  Outcome truth = Outcome::kFailure;
};

// One ranked candidate, kept only when dump_rankings is on.
struct RankingRecord {
  int repetition = 0;
  std::string target_id;
  std::string candidate_id;
  double score = 0.0;
  bool selected = false;
};

struct SplitMetrics {
  int repetition = 0;
  ConfusionCounts counts;
  MetricValues metrics;
  std::string scaler_fingerprint;  // empty in text-only mode
  std::size_t decode_fallbacks = 0;
};

struct MetricsReport {
  std::vector<SplitMetrics> splits;
  MetricValues mean;
  MetricValues stddev;  // population std over split values
  std::size_t decode_retries = 0;
  std::size_t decode_fallbacks = 0;
  std::size_t excluded_empty_description = 0;
  std::vector<PredictionRecord> predictions;  // pooled across repetitions
  std::vector<RankingRecord> rankings;        // only when dump_rankings
};

// Sector metrics are suppressed below this many pooled predictions; the
// counts still appear so small sectors stay visible.
inline constexpr std::size_t kSectorMetricThreshold = 10;

struct SectorMetrics {
  std::string sector;
  ConfusionCounts counts;
  std::optional<MetricValues> metrics;
  double relative_frequency = 0.0;
  std::size_t prediction_count = 0;
};

// Pools confusion counts across all repetitions; a prediction contributes to
// every sector its target belongs to. Ordered by prediction count, then name.
std::vector<SectorMetrics> sector_breakdown(
    const std::vector<PredictionRecord>& predictions);

// The full protocol: repeated stratified splits, train-only scaler fit,
// per-target shot selection, backend prediction with one retry and a
// majority-class fallback, split metrics, and mean/std aggregation.
// `backend` may be null for logreg, `embedder` for structured-only runs;
// `label_store` defaults to reading the dataset directly.
MetricsReport run_experiment(const ExperimentConfig& config,
                             const Dataset& dataset,
                             CompletionBackend* backend, Embedder* embedder,
                             LabelStore* label_store = nullptr);

// Reruns the identical protocol once per alpha value: same seed, hence the
// same splits and targets, so metric differences isolate alpha. Passing a
// caching embedder keeps the embedding work to one pass over unique texts.
std::vector<std::pair<double, MetricsReport>> alpha_sweep(
    const ExperimentConfig& config, const Dataset& dataset,
    CompletionBackend* backend, Embedder* embedder,
    const std::vector<double>& alphas, LabelStore* label_store = nullptr);

}  // namespace knnicl

#endif  // KNNICL_EVALUATION_H_
