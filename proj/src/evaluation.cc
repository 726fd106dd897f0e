#include "knnicl/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "knnicl/features.h"
#include "knnicl/rng.h"

namespace knnicl {
namespace {

// Runs fn(0..n) across up to `workers` threads; the first exception wins and
// is rethrown after all workers drain.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto body = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error == nullptr) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> threads;
  threads.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(body);
  for (std::thread& t : threads) t.join();
  if (error != nullptr) std::rethrow_exception(error);
}

bool needs_backend(Method method) { return method != Method::kLogReg; }

bool needs_shots(Method method) { return method != Method::kZeroShot; }

bool needs_retrieval(Method method) {
  return method == Method::kKnnIcl || method == Method::kLogReg;
}

void validate_config(const ExperimentConfig& config,
                     CompletionBackend* backend, Embedder* embedder,
                     bool needs_embeddings) {
  if (config.repetitions < 1) {
    throw ValidationError("repetitions must be at least 1");
  }
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie strictly between 0 and 1");
  }
  if (config.concurrency < 1) {
    throw ValidationError("concurrency must be at least 1");
  }
  if (config.feature_mode == FeatureMode::kFused && !(config.alpha > 0.0)) {
    throw ValidationError("alpha must be positive");
  }
  if (needs_retrieval(config.method) && config.k < 2) {
    throw ValidationError(to_string(config.method) + " needs k >= 2, got " +
                          std::to_string(config.k));
  }
  if (needs_shots(config.method) && config.k < 1) {
    throw ValidationError("k must be positive, got " +
                          std::to_string(config.k));
  }
  if (needs_backend(config.method) && backend == nullptr) {
    throw ValidationError(to_string(config.method) +
                          " needs a completion backend");
  }
  if (needs_embeddings && embedder == nullptr) {
    throw ValidationError(to_string(config.feature_mode) +
                          " feature mode needs an embedder");
  }
}

struct SplitTables {
  ScalerParams scaler;
  std::string scaler_fingerprint;
  FusedTable train_table;  // training candidates only
  FusedTable full_table;   // training candidates plus test targets
};

// Builds the per-split fused vectors: scaler from training rows only,
// embeddings for everyone, blocks gated by the feature mode.
SplitTables build_tables(const ExperimentConfig& config, const Dataset& cohort,
                         const SplitAssignment& split, Embedder* embedder) {
  SplitTables tables;
  const bool use_structured =
      config.feature_mode != FeatureMode::kTextOnly;
  const bool use_text = config.feature_mode != FeatureMode::kStructuredOnly;

  if (use_structured) {
    std::vector<const StartupRecord*> train_records;
    train_records.reserve(split.train_ids.size());
    for (const std::string& id : split.train_ids) {
      train_records.push_back(&cohort.at(id));
    }
    tables.scaler = fit_scaler(train_records);
    tables.scaler_fingerprint = tables.scaler.fingerprint();
  }

  std::size_t text_dim = 0;
  auto fuse_record = [&](const StartupRecord& record) -> FusedVector {
    std::vector<double> structured;
    if (use_structured) structured = apply_scaler(tables.scaler, record);
    if (!use_text) return fused_structured_only(structured);
    Embedding embedding = embedder->embed(record.description);
    if (text_dim == 0) {
      text_dim = embedding.dim();
    } else if (embedding.dim() != text_dim) {
      throw ValidationError("embedding dimension changed mid-run: \"" +
                            record.id + "\" got " +
                            std::to_string(embedding.dim()) + ", expected " +
                            std::to_string(text_dim));
    }
    if (!use_structured) return fused_text_only(embedding);
    return fuse(structured, embedding, config.alpha);
  };

  for (const std::string& id : split.train_ids) {
    FusedVector fused = fuse_record(cohort.at(id));
    tables.full_table.emplace(id, fused);
    tables.train_table.emplace(id, std::move(fused));
  }
  for (const std::string& id : split.test_ids) {
    tables.full_table.emplace(id, fuse_record(cohort.at(id)));
  }
  return tables;
}

void aggregate(MetricsReport& report) {
  const auto r = static_cast<double>(report.splits.size());
  auto fold = [&](double MetricValues::*field, double& mean_out,
                  double& std_out) {
    double mean = 0.0;
    for (const SplitMetrics& s : report.splits) mean += s.metrics.*field;
    mean /= r;
    double variance = 0.0;
    for (const SplitMetrics& s : report.splits) {
      const double d = s.metrics.*field - mean;
      variance += d * d;
    }
    mean_out = mean;
    std_out = std::sqrt(variance / r);
  };
  fold(&MetricValues::balanced_accuracy, report.mean.balanced_accuracy,
       report.stddev.balanced_accuracy);
  fold(&MetricValues::precision, report.mean.precision,
       report.stddev.precision);
  fold(&MetricValues::recall, report.mean.recall, report.stddev.recall);
  fold(&MetricValues::f1, report.mean.f1, report.stddev.f1);
  for (const SplitMetrics& s : report.splits) {
    report.mean.precision_degenerate |= s.metrics.precision_degenerate;
    report.mean.recall_degenerate |= s.metrics.recall_degenerate;
    report.mean.specificity_degenerate |= s.metrics.specificity_degenerate;
    report.mean.f1_degenerate |= s.metrics.f1_degenerate;
  }
}

}  // namespace

void ConfusionCounts::add(Outcome truth, Outcome predicted) {
  if (truth == Outcome::kSuccess) {
    predicted == Outcome::kSuccess ? ++tp : ++fn;
  } else {
    predicted == Outcome::kFailure ? ++tn : ++fp;
  }
}

MetricValues compute_metrics(const ConfusionCounts& counts) {
  if (counts.total() == 0) {
    throw ValidationError("cannot compute metrics over zero predictions");
  }
  MetricValues m;
  const double tp = static_cast<double>(counts.tp);
  const double fp = static_cast<double>(counts.fp);
  const double tn = static_cast<double>(counts.tn);
  const double fn = static_cast<double>(counts.fn);
  double specificity = 0.0;
  if (counts.tp + counts.fn > 0) {
    m.recall = tp / (tp + fn);
  } else {
    m.recall_degenerate = true;
  }
  if (counts.tn + counts.fp > 0) {
    specificity = tn / (tn + fp);
  } else {
    m.specificity_degenerate = true;
  }
  m.balanced_accuracy = (m.recall + specificity) / 2.0;
  if (counts.tp + counts.fp > 0) {
    m.precision = tp / (tp + fp);
  } else {
    m.precision_degenerate = true;
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_degenerate = true;
  }
  return m;
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kKnnIcl:
      return "knn_icl";
    case Method::kVanillaIcl:
      return "vanilla_icl";
    case Method::kSectorIcl:
      return "sector_icl";
    case Method::kZeroShot:
      return "zero_shot";
    case Method::kLogReg:
      return "logreg";
  }
  throw ValidationError("unknown method");
}

std::string to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kStructuredOnly:
      return "structured_only";
    case FeatureMode::kTextOnly:
      return "text_only";
    case FeatureMode::kFused:
      return "fused";
  }
  throw ValidationError("unknown feature mode");
}

Method method_from_string(const std::string& name) {
  if (name == "knn_icl") return Method::kKnnIcl;
  if (name == "vanilla_icl") return Method::kVanillaIcl;
  if (name == "sector_icl") return Method::kSectorIcl;
  if (name == "zero_shot") return Method::kZeroShot;
  if (name == "logreg") return Method::kLogReg;
  throw ValidationError(
      "unknown method \"" + name +
      "\" (expected knn_icl, vanilla_icl, sector_icl, zero_shot, or logreg)");
}

FeatureMode feature_mode_from_string(const std::string& name) {
  if (name == "structured_only") return FeatureMode::kStructuredOnly;
  if (name == "text_only") return FeatureMode::kTextOnly;
  if (name == "fused") return FeatureMode::kFused;
  throw ValidationError(
      "unknown feature mode \"" + name +
      "\" (expected structured_only, text_only, or fused)");
}

std::optional<Outcome> DatasetLabelStore::get(const std::string& id) {
  const StartupRecord* record = dataset_.find(id);
  if (record == nullptr) return std::nullopt;
  return record->outcome;
}

std::vector<SectorMetrics> sector_breakdown(
    const std::vector<PredictionRecord>& predictions) {
  std::map<std::string, SectorMetrics> by_sector;
  for (const PredictionRecord& p : predictions) {
    for (const std::string& sector : p.sectors) {
      SectorMetrics& entry = by_sector[sector];
      entry.sector = sector;
      entry.counts.add(p.truth, p.predicted);
      ++entry.prediction_count;
    }
  }
  std::vector<SectorMetrics> out;
  out.reserve(by_sector.size());
  const double total = static_cast<double>(predictions.size());
  for (auto& [sector, entry] : by_sector) {
    (void)sector;
    if (total > 0) {
      entry.relative_frequency =
          static_cast<double>(entry.prediction_count) / total;
    }
    if (entry.prediction_count >= kSectorMetricThreshold) {
      entry.metrics = compute_metrics(entry.counts);
    }
    out.push_back(std::move(entry));
  }
  std::sort(out.begin(), out.end(),
            [](const SectorMetrics& a, const SectorMetrics& b) {
              if (a.prediction_count != b.prediction_count) {
                return a.prediction_count > b.prediction_count;
              }
              return a.sector < b.sector;
            });
  return out;
}

MetricsReport run_experiment(const ExperimentConfig& config,
                             const Dataset& dataset,
                             CompletionBackend* backend, Embedder* embedder,
                             LabelStore* label_store) {
  const bool needs_embeddings =
      needs_shots(config.method) &&
      config.feature_mode != FeatureMode::kStructuredOnly;
  validate_config(config, backend, embedder, needs_embeddings);

  DatasetLabelStore default_store(dataset);
  LabelStore* store = label_store != nullptr ? label_store : &default_store;

  // Working cohort: labeled records, minus empty descriptions when the run
  // needs text embeddings.
  std::vector<StartupRecord> kept;
  std::size_t excluded = 0;
  for (const StartupRecord& record : dataset.records()) {
    if (!record.labeled()) continue;
    if (needs_embeddings && record.description.empty()) {
      ++excluded;
      continue;
    }
    kept.push_back(record);
  }
  Dataset cohort(std::move(kept));

  std::vector<SplitAssignment> splits = stratified_shuffle_splits(
      cohort, config.repetitions, config.train_fraction, config.seed);

  if (needs_shots(config.method)) {
    // Fail before any backend call if a split cannot supply k candidates.
    for (const SplitAssignment& split : splits) {
      if (static_cast<std::size_t>(config.k) > split.train_ids.size()) {
        throw ValidationError(
            "k=" + std::to_string(config.k) +
            " exceeds the training pool of repetition " +
            std::to_string(split.repetition_index) + " (" +
            std::to_string(split.train_ids.size()) + " records)");
      }
    }
  }

  MetricsReport report;
  report.excluded_empty_description = excluded;
  std::atomic<std::size_t> retries{0};

  for (const SplitAssignment& split : splits) {
    const int r = split.repetition_index;

    SplitTables tables;
    if (needs_shots(config.method)) {
      tables = build_tables(config, cohort, split, embedder);
    }

    LabelMap train_labels;
    if (needs_shots(config.method)) {
      for (const std::string& id : split.train_ids) {
        std::optional<Outcome> outcome = store->get(id);
        if (!outcome.has_value()) {
          throw RuntimeFailure("training record \"" + id + "\" has no label");
        }
        train_labels.emplace(id, *outcome);
      }
    }

    const std::vector<std::string> test_ids(split.test_ids.begin(),
                                            split.test_ids.end());
    std::vector<PredictionRecord> rep_predictions(test_ids.size());
    std::vector<std::vector<RankingRecord>> rep_rankings(
        config.dump_rankings ? test_ids.size() : 0);
    std::atomic<std::size_t> rep_fallbacks{0};

    auto complete_with_retry = [&](const PromptBundle& bundle,
                                   PredictionRecord& record) {
      std::string response = backend->complete(bundle);
      Prediction prediction = decode_response(response);
      if (prediction.status == DecodeStatus::kError) {
        ++retries;
        response = backend->complete(bundle);
        prediction = decode_response(response);
      }
      record.raw_response = response;
      if (prediction.status == DecodeStatus::kError) {
        // Retry exhausted: fall back to the majority (negative) class and
        // count the item so suspicious runs stay visible.
        record.predicted = Outcome::kFailure;
        record.status = DecodeStatus::kFallback;
        ++rep_fallbacks;
      } else {
        record.predicted = *prediction.label;
        record.status = prediction.status;
      }
    };

    parallel_for(
        test_ids.size(), config.concurrency, [&](std::size_t i) {
          const std::string& target_id = test_ids[i];
          const StartupRecord& target = cohort.at(target_id);
          PredictionRecord record;
          record.repetition = r;
          record.target_id = target_id;
          record.sectors = target.sectors;

          switch (config.method) {
            case Method::kKnnIcl:
            case Method::kLogReg: {
              const std::uint64_t target_seed =
                  derive_seed(config.seed, "retrieval", r, target_id);
              const FusedVector& target_vector =
                  tables.full_table.at(target_id);
              SupportSet support = retrieve_support_set(
                  target_id, target_vector, tables.train_table, train_labels,
                  config.k, target_seed, config.interleave_order);
              for (const Shot& shot : support.shots) {
                record.shot_ids.push_back(shot.id);
              }
              if (config.dump_rankings) {
                std::vector<SimilarityScore> ranking = rank_candidates(
                    target_vector, tables.train_table, target_seed, target_id);
                std::set<std::string> chosen(record.shot_ids.begin(),
                                             record.shot_ids.end());
                for (const SimilarityScore& s : ranking) {
                  rep_rankings[i].push_back(RankingRecord{
                      r, target_id, s.candidate_id, s.score,
                      chosen.count(s.candidate_id) > 0});
                }
              }
              if (config.method == Method::kLogReg) {
                std::vector<LabeledVector> examples;
                examples.reserve(support.shots.size());
                for (const Shot& shot : support.shots) {
                  examples.push_back(LabeledVector{
                      shot.id, tables.train_table.at(shot.id).values,
                      shot.outcome});
                }
                LogRegModel model = train_logreg(examples, config.logreg);
                const double decision =
                    logreg_decision(model, target_vector.values);
                record.predicted = decision >= 0.0 ? Outcome::kSuccess
                                                   : Outcome::kFailure;
                record.status = DecodeStatus::kClean;
                record.raw_response = format_double(decision);
              } else {
                PromptBundle bundle = render_prompt(cohort, support, target,
                                                    PromptMode::kFewShot);
                complete_with_retry(bundle, record);
              }
              break;
            }
            case Method::kVanillaIcl:
            case Method::kSectorIcl: {
              const std::uint64_t target_seed =
                  derive_seed(config.seed, "sampling", r, target_id);
              SupportSet support =
                  config.method == Method::kVanillaIcl
                      ? select_random_shots(target_id, tables.full_table,
                                            train_labels, config.k,
                                            target_seed)
                      : select_sector_shots(target, cohort, tables.full_table,
                                            train_labels, config.k,
                                            target_seed);
              for (const Shot& shot : support.shots) {
                record.shot_ids.push_back(shot.id);
              }
              PromptBundle bundle = render_prompt(cohort, support, target,
                                                  PromptMode::kFewShot);
              complete_with_retry(bundle, record);
              break;
            }
            case Method::kZeroShot: {
              SupportSet empty;
              empty.target_id = target_id;
              empty.k = 0;
              PromptBundle bundle = render_prompt(cohort, empty, target,
                                                  PromptMode::kZeroShot);
              complete_with_retry(bundle, record);
              break;
            }
          }
          rep_predictions[i] = std::move(record);
        });

    store->note_scoring_begin(r);
    SplitMetrics split_metrics;
    split_metrics.repetition = r;
    split_metrics.scaler_fingerprint = tables.scaler_fingerprint;
    split_metrics.decode_fallbacks = rep_fallbacks.load();
    for (PredictionRecord& record : rep_predictions) {
      std::optional<Outcome> truth = store->get(record.target_id);
      if (!truth.has_value()) {
        throw RuntimeFailure("test record \"" + record.target_id +
                             "\" has no label");
      }
      record.truth = *truth;
      split_metrics.counts.add(record.truth, record.predicted);
    }
    split_metrics.metrics = compute_metrics(split_metrics.counts);
    report.decode_fallbacks += split_metrics.decode_fallbacks;
    report.splits.push_back(split_metrics);
    for (PredictionRecord& record : rep_predictions) {
      report.predictions.push_back(std::move(record));
    }
    for (std::vector<RankingRecord>& rows : rep_rankings) {
      for (RankingRecord& row : rows) {
        report.rankings.push_back(std::move(row));
      }
    }
  }

  report.decode_retries = retries.load();
  aggregate(report);
  return report;
}

std::vector<std::pair<double, MetricsReport>> alpha_sweep(
    const ExperimentConfig& config, const Dataset& dataset,
    CompletionBackend* backend, Embedder* embedder,
    const std::vector<double>& alphas, LabelStore* label_store) {
  if (config.feature_mode != FeatureMode::kFused) {
    throw ValidationError("alpha sweep requires the fused feature mode");
  }
  if (alphas.empty()) {
    throw ValidationError("alpha sweep needs at least one alpha value");
  }
  std::vector<std::pair<double, MetricsReport>> results;
  results.reserve(alphas.size());
  for (double alpha : alphas) {
    ExperimentConfig sweep_config = config;
    sweep_config.alpha = alpha;
    results.emplace_back(alpha, run_experiment(sweep_config, dataset, backend,
                                               embedder, label_store));
  }
  return results;
}

}  // namespace knnicl
