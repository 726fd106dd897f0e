#include "knnicl/evaluation.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gtest/gtest.h"
#include "knnicl/backend.h"
#include "knnicl/dataset.h"

namespace knnicl {
namespace {

TEST(ConfusionCounts, AddRoutesAllFourCells) {
  ConfusionCounts counts;
  counts.add(Outcome::kSuccess, Outcome::kSuccess);
  counts.add(Outcome::kSuccess, Outcome::kFailure);
  counts.add(Outcome::kFailure, Outcome::kFailure);
  counts.add(Outcome::kFailure, Outcome::kSuccess);
  EXPECT_EQ(counts.tp, 1u);
  EXPECT_EQ(counts.fn, 1u);
  EXPECT_EQ(counts.tn, 1u);
  EXPECT_EQ(counts.fp, 1u);
  EXPECT_EQ(counts.total(), 4u);
}

TEST(ComputeMetrics, HandTalliedMixedCase) {
  const ConfusionCounts counts{5, 2, 8, 1};
  const MetricValues m = compute_metrics(counts);
  EXPECT_DOUBLE_EQ(m.recall, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.precision, 5.0 / 7.0);
  EXPECT_DOUBLE_EQ(m.balanced_accuracy, (5.0 / 6.0 + 8.0 / 10.0) / 2.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 * (5.0 / 7.0) * (5.0 / 6.0) /
                             (5.0 / 7.0 + 5.0 / 6.0));
  EXPECT_FALSE(m.precision_degenerate);
  EXPECT_FALSE(m.recall_degenerate);
  EXPECT_FALSE(m.specificity_degenerate);
  EXPECT_FALSE(m.f1_degenerate);
}

TEST(ComputeMetrics, PerfectPredictions) {
  const MetricValues m = compute_metrics(ConfusionCounts{3, 0, 7, 0});
  EXPECT_DOUBLE_EQ(m.balanced_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.precision, 1.0);
  EXPECT_DOUBLE_EQ(m.recall, 1.0);
  EXPECT_DOUBLE_EQ(m.f1, 1.0);
}

TEST(ComputeMetrics, NoPositiveTruthsFlagsRecall) {
  const MetricValues m = compute_metrics(ConfusionCounts{0, 2, 8, 0});
  EXPECT_TRUE(m.recall_degenerate);
  EXPECT_DOUBLE_EQ(m.recall, 0.0);
  EXPECT_FALSE(m.precision_degenerate);
  EXPECT_DOUBLE_EQ(m.precision, 0.0);
  EXPECT_DOUBLE_EQ(m.balanced_accuracy, 0.4);
  EXPECT_TRUE(m.f1_degenerate);
}

TEST(ComputeMetrics, NoPredictedPositivesFlagsPrecision) {
  const MetricValues m = compute_metrics(ConfusionCounts{0, 0, 5, 5});
  EXPECT_TRUE(m.precision_degenerate);
  EXPECT_FALSE(m.recall_degenerate);
  EXPECT_DOUBLE_EQ(m.recall, 0.0);
  EXPECT_DOUBLE_EQ(m.balanced_accuracy, 0.5);
  EXPECT_TRUE(m.f1_degenerate);
}

TEST(ComputeMetrics, NoNegativeTruthsFlagsSpecificity) {
  const MetricValues m = compute_metrics(ConfusionCounts{4, 0, 0, 1});
  EXPECT_TRUE(m.specificity_degenerate);
  EXPECT_DOUBLE_EQ(m.balanced_accuracy, (4.0 / 5.0) / 2.0);
  EXPECT_FALSE(m.recall_degenerate);
}

TEST(ComputeMetrics, ZeroPredictionsThrow) {
  EXPECT_THROW(compute_metrics(ConfusionCounts{}), ValidationError);
}

TEST(MethodNames, RoundTripAndRejectUnknown) {
  for (Method m : {Method::kKnnIcl, Method::kVanillaIcl, Method::kSectorIcl,
                   Method::kZeroShot, Method::kLogReg}) {
    EXPECT_EQ(method_from_string(to_string(m)), m);
  }
  EXPECT_THROW(method_from_string("gradient_boost"), ValidationError);
  for (FeatureMode f : {FeatureMode::kStructuredOnly, FeatureMode::kTextOnly,
                        FeatureMode::kFused}) {
    EXPECT_EQ(feature_mode_from_string(to_string(f)), f);
  }
  EXPECT_THROW(feature_mode_from_string("hybrid"), ValidationError);
}

TEST(DatasetLabelStore, ReadsLabelsAndReportsUnknownIds) {
  std::vector<StartupRecord> records(2);
  records[0].id = "a";
  records[0].outcome = Outcome::kSuccess;
  records[1].id = "b";
  const Dataset dataset(std::move(records));
  DatasetLabelStore store(dataset);
  EXPECT_EQ(store.get("a"), Outcome::kSuccess);
  EXPECT_EQ(store.get("b"), std::nullopt) << "unlabeled record";
  EXPECT_EQ(store.get("missing"), std::nullopt);
}

PredictionRecord prediction(std::set<std::string> sectors, Outcome truth,
                            Outcome predicted) {
  PredictionRecord p;
  p.sectors = std::move(sectors);
  p.truth = truth;
  p.predicted = predicted;
  return p;
}

TEST(SectorBreakdown, PoolsCountsPerSectorMembership) {
  std::vector<PredictionRecord> predictions;
  predictions.push_back(
      prediction({"A", "B"}, Outcome::kSuccess, Outcome::kSuccess));
  predictions.push_back(prediction({"A"}, Outcome::kFailure, Outcome::kSuccess));
  predictions.push_back(prediction({}, Outcome::kSuccess, Outcome::kSuccess));
  predictions.push_back(prediction({"B"}, Outcome::kSuccess, Outcome::kFailure));
  const std::vector<SectorMetrics> rows = sector_breakdown(predictions);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].sector, "A");
  EXPECT_EQ(rows[0].prediction_count, 2u);
  EXPECT_EQ(rows[0].counts.tp, 1u);
  EXPECT_EQ(rows[0].counts.fp, 1u);
  EXPECT_DOUBLE_EQ(rows[0].relative_frequency, 0.5);
  EXPECT_FALSE(rows[0].metrics.has_value()) << "below the metric threshold";
  EXPECT_EQ(rows[1].sector, "B");
  EXPECT_EQ(rows[1].counts.tp, 1u);
  EXPECT_EQ(rows[1].counts.fn, 1u);
}

TEST(SectorBreakdown, MetricsAppearAtThreshold) {
  std::vector<PredictionRecord> predictions;
  for (std::size_t i = 0; i < kSectorMetricThreshold; ++i) {
    predictions.push_back(
        prediction({"big"}, Outcome::kSuccess, Outcome::kSuccess));
  }
  predictions.push_back(
      prediction({"small"}, Outcome::kFailure, Outcome::kFailure));
  const std::vector<SectorMetrics> rows = sector_breakdown(predictions);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].sector, "big");
  ASSERT_TRUE(rows[0].metrics.has_value());
  EXPECT_DOUBLE_EQ(rows[0].metrics->recall, 1.0);
  EXPECT_FALSE(rows[1].metrics.has_value());
}

TEST(SectorBreakdown, OrdersByCountThenName) {
  std::vector<PredictionRecord> predictions;
  predictions.push_back(
      prediction({"zeta", "beta"}, Outcome::kSuccess, Outcome::kSuccess));
  predictions.push_back(
      prediction({"zeta", "alpha"}, Outcome::kSuccess, Outcome::kSuccess));
  predictions.push_back(prediction({"zeta"}, Outcome::kSuccess,
                                   Outcome::kSuccess));
  const std::vector<SectorMetrics> rows = sector_breakdown(predictions);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].sector, "zeta");
  EXPECT_EQ(rows[1].sector, "alpha");
  EXPECT_EQ(rows[2].sector, "beta");
}

Dataset synthetic_dataset(int n, double separation, std::uint64_t seed) {
  SyntheticOptions options;
  options.n = n;
  options.embed_dim = 8;
  options.separation = separation;
  options.seed = seed;
  return generate_synthetic(options).dataset;
}

ExperimentConfig oracle_config() {
  ExperimentConfig config;
  config.method = Method::kKnnIcl;
  config.k = 6;
  config.repetitions = 3;
  config.seed = 11;
  return config;
}

TEST(RunExperiment, OracleOnSeparableDataScoresHighly) {
  const Dataset dataset = synthetic_dataset(80, 6.0, 3);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;
  const MetricsReport report =
      run_experiment(oracle_config(), dataset, &backend, &embedder);

  ASSERT_EQ(report.splits.size(), 3u);
  EXPECT_GE(report.mean.balanced_accuracy, 0.9);
  EXPECT_EQ(report.decode_retries, 0u);
  EXPECT_EQ(report.decode_fallbacks, 0u);
  EXPECT_EQ(report.excluded_empty_description, 0u);
  EXPECT_EQ(report.predictions.size(), 3u * 16u) << "80 * 0.2 targets per rep";
  for (const SplitMetrics& split : report.splits) {
    EXPECT_EQ(split.scaler_fingerprint.size(), 64u);
    EXPECT_EQ(split.counts.total(), 16u);
  }
  // Train sets differ across repetitions, so the fingerprints must too.
  EXPECT_NE(report.splits[0].scaler_fingerprint,
            report.splits[1].scaler_fingerprint);
  for (const PredictionRecord& p : report.predictions) {
    EXPECT_EQ(p.shot_ids.size(), 6u);
    EXPECT_EQ(p.status, DecodeStatus::kClean);
    for (const std::string& shot : p.shot_ids) {
      EXPECT_NE(shot, p.target_id);
    }
  }
  EXPECT_TRUE(report.rankings.empty());
}

std::vector<std::tuple<int, std::string, Outcome, std::string>> fingerprint(
    const MetricsReport& report) {
  std::vector<std::tuple<int, std::string, Outcome, std::string>> out;
  for (const PredictionRecord& p : report.predictions) {
    std::string shots;
    for (const std::string& id : p.shot_ids) shots += id + ",";
    out.emplace_back(p.repetition, p.target_id, p.predicted,
                     p.raw_response + "|" + shots);
  }
  return out;
}

TEST(RunExperiment, RepeatRunsAreIdentical) {
  const Dataset dataset = synthetic_dataset(60, 4.0, 5);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;
  const MetricsReport a =
      run_experiment(oracle_config(), dataset, &backend, &embedder);
  const MetricsReport b =
      run_experiment(oracle_config(), dataset, &backend, &embedder);
  EXPECT_EQ(fingerprint(a), fingerprint(b));
  EXPECT_EQ(a.mean.balanced_accuracy, b.mean.balanced_accuracy);
  EXPECT_EQ(a.stddev.balanced_accuracy, b.stddev.balanced_accuracy);
}

TEST(RunExperiment, ConcurrencyDoesNotChangeResults) {
  const Dataset dataset = synthetic_dataset(60, 4.0, 5);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;
  ExperimentConfig serial = oracle_config();
  ExperimentConfig parallel = oracle_config();
  parallel.concurrency = 4;
  const MetricsReport a =
      run_experiment(serial, dataset, &backend, &embedder);
  const MetricsReport b =
      run_experiment(parallel, dataset, &backend, &embedder);
  EXPECT_EQ(fingerprint(a), fingerprint(b));
  EXPECT_EQ(a.mean.balanced_accuracy, b.mean.balanced_accuracy);
}

TEST(RunExperiment, MeanAndStdAggregateSplitValues) {
  const Dataset dataset = synthetic_dataset(60, 3.0, 9);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;
  const MetricsReport report =
      run_experiment(oracle_config(), dataset, &backend, &embedder);
  double mean = 0.0;
  for (const SplitMetrics& s : report.splits) {
    mean += s.metrics.balanced_accuracy;
  }
  mean /= static_cast<double>(report.splits.size());
  double variance = 0.0;
  for (const SplitMetrics& s : report.splits) {
    const double d = s.metrics.balanced_accuracy - mean;
    variance += d * d;
  }
  variance /= static_cast<double>(report.splits.size());
  EXPECT_NEAR(report.mean.balanced_accuracy, mean, 1e-12);
  EXPECT_NEAR(report.stddev.balanced_accuracy, std::sqrt(variance), 1e-12);
}

// Label store that whitelists the reads a leakage-free protocol performs:
// while repetition r assembles pools and prompts, only train ids of r (and
// the truth reads of the repetition just scored) are legitimate.
class WhitelistLabelStore : public LabelStore {
 public:
  WhitelistLabelStore(const Dataset& dataset,
                      std::vector<SplitAssignment> splits)
      : dataset_(dataset), splits_(std::move(splits)) {}

  std::optional<Outcome> get(const std::string& id) override {
    std::lock_guard<std::mutex> lock(mutex_);
    bool allowed = false;
    if (announced_ < static_cast<int>(splits_.size()) &&
        splits_[announced_].train_ids.count(id) > 0) {
      allowed = true;
    }
    if (announced_ > 0 &&
        splits_[announced_ - 1].test_ids.count(id) > 0) {
      allowed = true;
    }
    if (!allowed) ++violations_;
    const StartupRecord* record = dataset_.find(id);
    return record == nullptr ? std::nullopt : record->outcome;
  }

  void note_scoring_begin(int repetition) override {
    std::lock_guard<std::mutex> lock(mutex_);
    if (repetition != announced_) ++protocol_errors_;
    ++announced_;
  }

  int violations() const { return violations_; }
  int protocol_errors() const { return protocol_errors_; }
  int announced() const { return announced_; }

 private:
  const Dataset& dataset_;
  std::vector<SplitAssignment> splits_;
  std::mutex mutex_;
  int announced_ = 0;
  int violations_ = 0;
  int protocol_errors_ = 0;
};

TEST(RunExperiment, NeverReadsTestLabelsBeforeScoring) {
  const Dataset dataset = synthetic_dataset(60, 4.0, 7);
  const ExperimentConfig config = oracle_config();
  const std::vector<SplitAssignment> splits = stratified_shuffle_splits(
      dataset, config.repetitions, config.train_fraction, config.seed);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;

  for (Method method : {Method::kKnnIcl, Method::kVanillaIcl,
                        Method::kLogReg}) {
    WhitelistLabelStore store(dataset, splits);
    ExperimentConfig run = config;
    run.method = method;
    run_experiment(run, dataset, &backend, &embedder, &store);
    EXPECT_EQ(store.violations(), 0) << to_string(method);
    EXPECT_EQ(store.protocol_errors(), 0) << to_string(method);
    EXPECT_EQ(store.announced(), config.repetitions) << to_string(method);
  }
}

TEST(WhitelistStore, CatchesForbiddenReads) {
  const Dataset dataset = synthetic_dataset(40, 4.0, 7);
  const std::vector<SplitAssignment> splits =
      stratified_shuffle_splits(dataset, 2, 0.8, 1);
  WhitelistLabelStore store(dataset, splits);
  const std::string test_id = *splits[0].test_ids.begin();
  store.get(test_id);  // test label read before any scoring notice
  EXPECT_GT(store.violations(), 0);
}

TEST(RunExperiment, LogRegTrainsOnTheRetrievedShotSet) {
  const Dataset dataset = synthetic_dataset(60, 4.0, 13);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;
  ExperimentConfig knn = oracle_config();
  ExperimentConfig logreg = oracle_config();
  logreg.method = Method::kLogReg;
  const MetricsReport knn_report =
      run_experiment(knn, dataset, &backend, &embedder);
  const MetricsReport logreg_report =
      run_experiment(logreg, dataset, nullptr, &embedder);

  std::map<std::pair<int, std::string>, std::vector<std::string>> knn_shots;
  for (const PredictionRecord& p : knn_report.predictions) {
    std::vector<std::string> ids = p.shot_ids;
    std::sort(ids.begin(), ids.end());
    knn_shots[{p.repetition, p.target_id}] = std::move(ids);
  }
  ASSERT_EQ(logreg_report.predictions.size(), knn_report.predictions.size());
  for (const PredictionRecord& p : logreg_report.predictions) {
    std::vector<std::string> ids = p.shot_ids;
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(ids, knn_shots.at({p.repetition, p.target_id}))
        << "repetition " << p.repetition << " target " << p.target_id;
  }
}

TEST(RunExperiment, UndecodableResponsesRetryThenFallBack) {
  const Dataset dataset = synthetic_dataset(40, 4.0, 3);
  FixedResponseBackend backend("UNKNOWABLE");
  ExperimentConfig config;
  config.method = Method::kVanillaIcl;
  config.feature_mode = FeatureMode::kStructuredOnly;
  config.k = 4;
  config.repetitions = 2;
  config.seed = 21;
  const MetricsReport report =
      run_experiment(config, dataset, &backend, nullptr);

  const std::size_t total = report.predictions.size();
  ASSERT_EQ(total, 16u);
  EXPECT_EQ(report.decode_retries, total);
  EXPECT_EQ(report.decode_fallbacks, total);
  std::size_t split_fallbacks = 0;
  for (const SplitMetrics& s : report.splits) {
    split_fallbacks += s.decode_fallbacks;
  }
  EXPECT_EQ(split_fallbacks, total);
  for (const PredictionRecord& p : report.predictions) {
    EXPECT_EQ(p.status, DecodeStatus::kFallback);
    EXPECT_EQ(p.predicted, Outcome::kFailure);
    EXPECT_EQ(p.raw_response, "UNKNOWABLE");
  }
  EXPECT_TRUE(report.mean.precision_degenerate)
      << "all-negative predictions leave precision undefined";
}

TEST(RunExperiment, ZeroShotNeedsNeitherShotsNorEmbedder) {
  const Dataset dataset = synthetic_dataset(40, 4.0, 3);
  FixedResponseBackend backend("SUCCESS");
  ExperimentConfig config;
  config.method = Method::kZeroShot;
  config.repetitions = 2;
  config.seed = 21;
  const MetricsReport report =
      run_experiment(config, dataset, &backend, nullptr);
  ASSERT_EQ(report.predictions.size(), 16u);
  for (const PredictionRecord& p : report.predictions) {
    EXPECT_TRUE(p.shot_ids.empty());
    EXPECT_EQ(p.predicted, Outcome::kSuccess);
    EXPECT_EQ(p.status, DecodeStatus::kClean);
  }
  for (const SplitMetrics& s : report.splits) {
    EXPECT_TRUE(s.scaler_fingerprint.empty()) << "no tables for zero-shot";
  }
}

TEST(RunExperiment, EmptyDescriptionsLeaveTextRunsOnly) {
  Dataset base = synthetic_dataset(50, 4.0, 17);
  std::vector<StartupRecord> records = base.records();
  std::set<std::string> blanked;
  for (std::size_t i = 0; i < 5; ++i) {
    records[i * 7].description.clear();
    blanked.insert(records[i * 7].id);
  }
  const Dataset dataset(std::move(records));
  NearestShotOracle backend;
  CoordinateEmbedder embedder;

  ExperimentConfig fused = oracle_config();
  const MetricsReport text_report =
      run_experiment(fused, dataset, &backend, &embedder);
  EXPECT_EQ(text_report.excluded_empty_description, 5u);
  for (const PredictionRecord& p : text_report.predictions) {
    EXPECT_EQ(blanked.count(p.target_id), 0u);
    for (const std::string& shot : p.shot_ids) {
      EXPECT_EQ(blanked.count(shot), 0u);
    }
  }

  ExperimentConfig structured = oracle_config();
  structured.feature_mode = FeatureMode::kStructuredOnly;
  const MetricsReport structured_report =
      run_experiment(structured, dataset, &backend, nullptr);
  EXPECT_EQ(structured_report.excluded_empty_description, 0u);
}

TEST(RunExperiment, RejectsBrokenConfigurations) {
  const Dataset dataset = synthetic_dataset(40, 4.0, 3);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;
  const ExperimentConfig good = oracle_config();

  ExperimentConfig c = good;
  c.repetitions = 0;
  EXPECT_THROW(run_experiment(c, dataset, &backend, &embedder),
               ValidationError);
  c = good;
  c.train_fraction = 1.0;
  EXPECT_THROW(run_experiment(c, dataset, &backend, &embedder),
               ValidationError);
  c = good;
  c.concurrency = 0;
  EXPECT_THROW(run_experiment(c, dataset, &backend, &embedder),
               ValidationError);
  c = good;
  c.alpha = 0.0;
  EXPECT_THROW(run_experiment(c, dataset, &backend, &embedder),
               ValidationError);
  c = good;
  c.k = 1;
  EXPECT_THROW(run_experiment(c, dataset, &backend, &embedder),
               ValidationError);
  c = good;
  c.method = Method::kVanillaIcl;
  c.k = 0;
  EXPECT_THROW(run_experiment(c, dataset, &backend, &embedder),
               ValidationError);
  c = good;
  EXPECT_THROW(run_experiment(c, dataset, nullptr, &embedder),
               ValidationError);
  EXPECT_THROW(run_experiment(c, dataset, &backend, nullptr),
               ValidationError);
}

TEST(RunExperiment, OversizedKFailsBeforeAnyPrediction) {
  const Dataset dataset = synthetic_dataset(10, 4.0, 3);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;
  ExperimentConfig config = oracle_config();
  config.k = 10;  // train pool per split is 8
  try {
    run_experiment(config, dataset, &backend, &embedder);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("exceeds the training pool"),
              std::string::npos);
  }
}

TEST(RunExperiment, RankingDumpMarksSelectedCandidates) {
  const Dataset dataset = synthetic_dataset(40, 4.0, 3);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;
  ExperimentConfig config = oracle_config();
  config.repetitions = 1;
  config.dump_rankings = true;
  const MetricsReport report =
      run_experiment(config, dataset, &backend, &embedder);
  ASSERT_FALSE(report.rankings.empty());

  std::map<std::string, std::set<std::string>> selected;
  std::map<std::string, std::size_t> candidates;
  std::map<std::string, double> last_score;
  for (const RankingRecord& row : report.rankings) {
    if (row.selected) selected[row.target_id].insert(row.candidate_id);
    auto it = last_score.find(row.target_id);
    if (it != last_score.end()) {
      EXPECT_GE(it->second, row.score) << "ranking not descending";
    }
    last_score[row.target_id] = row.score;
    ++candidates[row.target_id];
  }
  for (const PredictionRecord& p : report.predictions) {
    const std::set<std::string> shots(p.shot_ids.begin(), p.shot_ids.end());
    EXPECT_EQ(selected.at(p.target_id), shots);
    EXPECT_EQ(candidates.at(p.target_id), 32u) << "all train candidates listed";
  }
}

TEST(AlphaSweep, SharesSplitsAndEmbedsEachTextOnce) {
  const Dataset dataset = synthetic_dataset(60, 4.0, 23);
  NearestShotOracle backend;
  EmbedderConfig embedder_config;
  embedder_config.kind = EmbedderKind::kCoordinate;
  auto embedder = make_embedder(embedder_config, 1);
  auto* caching = dynamic_cast<CachingEmbedder*>(embedder.get());
  ASSERT_NE(caching, nullptr);

  const std::vector<double> alphas = {0.3, 0.5, 0.7};
  const auto results = alpha_sweep(oracle_config(), dataset, &backend,
                                   embedder.get(), alphas);
  ASSERT_EQ(results.size(), 3u);

  std::set<std::string> unique_texts;
  for (const StartupRecord& r : dataset.records()) {
    unique_texts.insert(r.description);
  }
  EXPECT_EQ(caching->stats().computed, unique_texts.size())
      << "repeat alphas must hit the cache";

  std::set<std::pair<int, std::string>> baseline;
  for (const PredictionRecord& p : results[0].second.predictions) {
    baseline.emplace(p.repetition, p.target_id);
  }
  for (std::size_t a = 0; a < results.size(); ++a) {
    EXPECT_DOUBLE_EQ(results[a].first, alphas[a]);
    std::set<std::pair<int, std::string>> targets;
    for (const PredictionRecord& p : results[a].second.predictions) {
      targets.emplace(p.repetition, p.target_id);
    }
    EXPECT_EQ(targets, baseline) << "splits must not depend on alpha";
  }
}

TEST(AlphaSweep, RequiresFusedModeAndAlphas) {
  const Dataset dataset = synthetic_dataset(40, 4.0, 3);
  NearestShotOracle backend;
  CoordinateEmbedder embedder;
  ExperimentConfig config = oracle_config();
  config.feature_mode = FeatureMode::kStructuredOnly;
  EXPECT_THROW(alpha_sweep(config, dataset, &backend, &embedder, {0.5}),
               ValidationError);
  EXPECT_THROW(alpha_sweep(oracle_config(), dataset, &backend, &embedder, {}),
               ValidationError);
}

}  // namespace
}  // namespace knnicl
