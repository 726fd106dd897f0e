#include "knnicl/baselines.h"

#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "knnicl/dataset.h"
#include "knnicl/rng.h"
#include "logreg_oracle.h"
#include "prompt_fixtures.h"

namespace knnicl {
namespace {

using knnicl_tests::newton_logreg_params;

std::vector<LabeledVector> random_problem(Rng& rng, std::size_t n,
                                          std::size_t dim) {
  std::vector<double> truth(dim + 1);
  for (double& w : truth) w = rng.next_normal();
  std::vector<LabeledVector> examples;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledVector e;
    e.id = "e-" + std::to_string(i);
    e.values.resize(dim);
    double z = truth[dim];
    for (std::size_t j = 0; j < dim; ++j) {
      e.values[j] = rng.next_normal();
      z += truth[j] * e.values[j];
    }
    e.outcome = rng.next_double() < 1.0 / (1.0 + std::exp(-z))
                    ? Outcome::kSuccess
                    : Outcome::kFailure;
    examples.push_back(std::move(e));
  }
  return examples;
}

bool both_classes(const std::vector<LabeledVector>& examples) {
  bool pos = false;
  bool neg = false;
  for (const auto& e : examples) {
    (e.outcome == Outcome::kSuccess ? pos : neg) = true;
  }
  return pos && neg;
}

TEST(BalancedClassWeights, FollowsHalfInverseFrequency) {
  std::vector<LabeledVector> examples(4);
  examples[0].outcome = Outcome::kSuccess;
  examples[1].outcome = Outcome::kSuccess;
  examples[2].outcome = Outcome::kSuccess;
  examples[3].outcome = Outcome::kFailure;
  const auto weights = balanced_class_weights(examples);
  EXPECT_DOUBLE_EQ(weights[static_cast<int>(Outcome::kFailure)], 2.0);
  EXPECT_DOUBLE_EQ(weights[static_cast<int>(Outcome::kSuccess)], 2.0 / 3.0);
}

TEST(LogRegObjective, HandComputedSinglePoint) {
  // One positive at x=0: z = b, loss = cw * log(1+exp(-b)).
  std::vector<LabeledVector> examples(2);
  examples[0].values = {0.0};
  examples[0].outcome = Outcome::kSuccess;
  examples[1].values = {0.0};
  examples[1].outcome = Outcome::kFailure;
  const std::array<double, 2> weights = {1.0, 1.0};
  // params = [w, b] = [3, 0]: both z=0, each contributes log(2); ridge on w.
  const double value = logreg_objective(examples, {3.0, 0.0}, 2.0, weights);
  EXPECT_NEAR(value, 2.0 * std::log(2.0) + 0.5 * 2.0 * 9.0, 1e-12);
}

TEST(LogRegGradient, MatchesCentralFiniteDifferences) {
  Rng rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t dim = 1 + rng.next_below(4);
    std::vector<LabeledVector> examples = random_problem(rng, 12, dim);
    if (!both_classes(examples)) continue;
    const auto weights = balanced_class_weights(examples);
    const double lambda = 0.5 + rng.next_double();
    std::vector<double> params(dim + 1);
    for (double& p : params) p = rng.next_normal();

    const std::vector<double> grad =
        logreg_gradient(examples, params, lambda, weights);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(params[i]));
      std::vector<double> lo = params;
      std::vector<double> hi = params;
      lo[i] -= h;
      hi[i] += h;
      const double numeric = (logreg_objective(examples, hi, lambda, weights) -
                              logreg_objective(examples, lo, lambda, weights)) /
                             (2.0 * h);
      EXPECT_NEAR(grad[i], numeric, 1e-4 * std::max(1.0, std::abs(numeric)))
          << "trial " << trial << " coordinate " << i;
    }
  }
}

TEST(TrainLogReg, AgreesWithIndependentNewtonSolver) {
  Rng rng(77);
  TrainOptions options;
  int instances = 0;
  int agreements = 0;
  int probes = 0;
  while (instances < 10) {
    const std::size_t dim = 2 + rng.next_below(3);
    std::vector<LabeledVector> examples =
        random_problem(rng, 14 + rng.next_below(20), dim);
    if (!both_classes(examples)) continue;
    ++instances;
    const LogRegModel model = train_logreg(examples, options);
    const std::vector<double> oracle =
        newton_logreg_params(examples, options.lambda);

    // The ridge term makes the objective strongly convex, so both solvers
    // must land on the same optimum.
    ASSERT_EQ(oracle.size(), model.weights.size() + 1);
    for (std::size_t i = 0; i < model.weights.size(); ++i) {
      EXPECT_NEAR(model.weights[i], oracle[i],
                  1e-4 * std::max(1.0, std::abs(oracle[i])));
    }
    EXPECT_NEAR(model.intercept, oracle.back(),
                1e-4 * std::max(1.0, std::abs(oracle.back())));

    for (const LabeledVector& e : examples) {
      double oracle_z = oracle[dim];
      for (std::size_t j = 0; j < dim; ++j) oracle_z += oracle[j] * e.values[j];
      const Outcome oracle_label =
          oracle_z >= 0.0 ? Outcome::kSuccess : Outcome::kFailure;
      agreements += predict_logreg(model, e.values) == oracle_label ? 1 : 0;
      ++probes;
    }
  }
  ASSERT_GT(probes, 0);
  EXPECT_GE(static_cast<double>(agreements) / probes, 0.95);
}

TEST(TrainLogReg, ConvergesAndReportsDiagnostics) {
  Rng rng(5);
  std::vector<LabeledVector> examples = random_problem(rng, 30, 3);
  ASSERT_TRUE(both_classes(examples));
  TrainOptions options;
  const LogRegModel model = train_logreg(examples, options);
  EXPECT_TRUE(model.converged);
  EXPECT_LT(model.final_gradient_norm, options.tol);
  EXPECT_GT(model.iterations, 0);
  EXPECT_LE(model.iterations, options.max_iter);
  EXPECT_EQ(model.weights.size(), 3u);
  EXPECT_DOUBLE_EQ(model.lambda, 1.0);
}

TEST(TrainLogReg, IterationBudgetIsHonored) {
  Rng rng(6);
  std::vector<LabeledVector> examples = random_problem(rng, 30, 4);
  ASSERT_TRUE(both_classes(examples));
  TrainOptions options;
  options.max_iter = 1;
  const LogRegModel model = train_logreg(examples, options);
  EXPECT_EQ(model.iterations, 1);
  EXPECT_FALSE(model.converged);
}

TEST(TrainLogReg, StrongerRidgeShrinksWeights) {
  Rng rng(7);
  std::vector<LabeledVector> examples = random_problem(rng, 40, 3);
  ASSERT_TRUE(both_classes(examples));
  auto weight_norm = [&](double lambda) {
    TrainOptions options;
    options.lambda = lambda;
    const LogRegModel model = train_logreg(examples, options);
    double sum = 0.0;
    for (double w : model.weights) sum += w * w;
    return std::sqrt(sum);
  };
  const double loose = weight_norm(0.1);
  const double medium = weight_norm(1.0);
  const double tight = weight_norm(10.0);
  EXPECT_GT(loose, medium);
  EXPECT_GT(medium, tight);
}

TEST(TrainLogReg, RejectsDegenerateInputs) {
  TrainOptions options;
  EXPECT_THROW(train_logreg({}, options), ValidationError);

  std::vector<LabeledVector> one_class(3);
  for (auto& e : one_class) {
    e.values = {1.0};
    e.outcome = Outcome::kFailure;
  }
  EXPECT_THROW(train_logreg(one_class, options), ValidationError);

  std::vector<LabeledVector> ragged(2);
  ragged[0].values = {1.0, 2.0};
  ragged[0].outcome = Outcome::kSuccess;
  ragged[1].values = {1.0};
  ragged[1].outcome = Outcome::kFailure;
  EXPECT_THROW(train_logreg(ragged, options), ValidationError);

  std::vector<LabeledVector> fine(2);
  fine[0].values = {1.0};
  fine[0].outcome = Outcome::kSuccess;
  fine[1].values = {-1.0};
  fine[1].outcome = Outcome::kFailure;
  TrainOptions bad_lambda;
  bad_lambda.lambda = 0.0;
  EXPECT_THROW(train_logreg(fine, bad_lambda), ValidationError);
  TrainOptions bad_iter;
  bad_iter.max_iter = 0;
  EXPECT_THROW(train_logreg(fine, bad_iter), ValidationError);
}

TEST(PredictLogReg, BoundaryMapsToSuccess) {
  LogRegModel model;
  model.weights = {1.0};
  model.intercept = 0.0;
  EXPECT_EQ(predict_logreg(model, {0.0}), Outcome::kSuccess);
  EXPECT_EQ(predict_logreg(model, {1e-9}), Outcome::kSuccess);
  EXPECT_EQ(predict_logreg(model, {-1e-9}), Outcome::kFailure);
  EXPECT_DOUBLE_EQ(logreg_decision(model, {0.5}), 0.5);
}

TEST(PredictLogReg, DimensionMismatchThrows) {
  LogRegModel model;
  model.weights = {1.0, 2.0};
  EXPECT_THROW(logreg_decision(model, {1.0}), ValidationError);
}

FusedVector fused(std::vector<double> values) {
  FusedVector v;
  v.values = std::move(values);
  return v;
}

struct ShotPool {
  FusedTable table;
  LabelMap labels;
};

ShotPool shot_pool(int n) {
  ShotPool pool;
  Rng rng(11);
  for (int i = 0; i < n; ++i) {
    const std::string id = "c-" + std::to_string(i);
    pool.table.emplace(id, fused({rng.next_normal(), rng.next_normal()}));
    pool.labels.emplace(
        id, i % 2 == 0 ? Outcome::kSuccess : Outcome::kFailure);
  }
  pool.table.emplace("target", fused({1.0, 0.0}));
  pool.labels.emplace("target", Outcome::kSuccess);
  return pool;
}

TEST(SelectRandomShots, SamplesWithoutReplacementExcludingTarget) {
  const ShotPool pool = shot_pool(12);
  const SupportSet support =
      select_random_shots("target", pool.table, pool.labels, 6, 3);
  EXPECT_EQ(support.shots.size(), 6u);
  EXPECT_EQ(support.k, 6);
  std::set<std::string> seen;
  for (const Shot& shot : support.shots) {
    EXPECT_NE(shot.id, "target");
    EXPECT_TRUE(seen.insert(shot.id).second) << "duplicate " << shot.id;
    EXPECT_EQ(shot.outcome, pool.labels.at(shot.id));
    EXPECT_DOUBLE_EQ(shot.score,
                     cosine_similarity(pool.table.at("target").values,
                                       pool.table.at(shot.id).values));
  }
}

TEST(SelectRandomShots, SeedControlsSelection) {
  const ShotPool pool = shot_pool(20);
  auto ids = [&](std::uint64_t seed) {
    std::vector<std::string> out;
    for (const Shot& s :
         select_random_shots("target", pool.table, pool.labels, 5, seed)
             .shots) {
      out.push_back(s.id);
    }
    return out;
  };
  EXPECT_EQ(ids(9), ids(9));
  std::set<std::vector<std::string>> distinct;
  for (std::uint64_t seed = 0; seed < 6; ++seed) distinct.insert(ids(seed));
  EXPECT_GT(distinct.size(), 1u);
}

TEST(SelectRandomShots, MissingVectorScoresZero) {
  ShotPool pool = shot_pool(4);
  pool.table.erase("c-1");
  const SupportSet support =
      select_random_shots("target", pool.table, pool.labels, 4, 1);
  for (const Shot& shot : support.shots) {
    if (shot.id == "c-1") EXPECT_DOUBLE_EQ(shot.score, 0.0);
  }
}

TEST(SelectRandomShots, RejectsOversizedK) {
  const ShotPool pool = shot_pool(3);
  EXPECT_THROW(select_random_shots("target", pool.table, pool.labels, 4, 1),
               ValidationError);
  EXPECT_THROW(select_random_shots("target", pool.table, pool.labels, 0, 1),
               ValidationError);
}

Dataset sector_dataset() {
  using knnicl_tests::prompt_record;
  std::vector<StartupRecord> records;
  records.push_back(prompt_record("t", 10.0, 1, 1, 1, 1, 1, 0, 1,
                                  {"Financials"}, {}, "target co",
                                  Outcome::kSuccess));
  for (int i = 0; i < 6; ++i) {
    records.push_back(prompt_record(
        "fin-" + std::to_string(i), 10.0, 1, 1, 1, 1, 1, 0, 1,
        {"Financials"}, {}, "bank", i % 2 == 0 ? Outcome::kSuccess
                                               : Outcome::kFailure));
  }
  for (int i = 0; i < 6; ++i) {
    records.push_back(prompt_record(
        "ind-" + std::to_string(i), 10.0, 1, 1, 1, 1, 1, 0, 1,
        {"Industrials"}, {}, "factory", i % 2 == 0 ? Outcome::kSuccess
                                                   : Outcome::kFailure));
  }
  return Dataset(std::move(records));
}

LabelMap labels_of(const Dataset& dataset) {
  LabelMap labels;
  for (const StartupRecord& r : dataset.records()) {
    labels.emplace(r.id, *r.outcome);
  }
  return labels;
}

TEST(SelectSectorShots, HalfComeFromOverlappingSectors) {
  const Dataset dataset = sector_dataset();
  const LabelMap labels = labels_of(dataset);
  const SupportSet support = select_sector_shots(
      dataset.at("t"), dataset, FusedTable{}, labels, 6, 1);
  EXPECT_EQ(support.shots.size(), 6u);
  int from_sector = 0;
  std::set<std::string> seen;
  for (const Shot& shot : support.shots) {
    EXPECT_NE(shot.id, "t");
    EXPECT_TRUE(seen.insert(shot.id).second);
    if (shot.id.rfind("fin-", 0) == 0) ++from_sector;
  }
  EXPECT_EQ(from_sector, 3);
}

TEST(SelectSectorShots, ShortSectorPoolFillsFromGeneral) {
  const Dataset dataset = sector_dataset();
  LabelMap labels = labels_of(dataset);
  // Only two sector mates remain labeled.
  for (int i = 2; i < 6; ++i) labels.erase("fin-" + std::to_string(i));
  const SupportSet support = select_sector_shots(
      dataset.at("t"), dataset, FusedTable{}, labels, 6, 1);
  EXPECT_EQ(support.shots.size(), 6u);
  int from_sector = 0;
  for (const Shot& shot : support.shots) {
    if (shot.id.rfind("fin-", 0) == 0) ++from_sector;
  }
  EXPECT_EQ(from_sector, 2);
}

TEST(SelectSectorShots, ShortGeneralPoolBackfillsFromSector) {
  const Dataset dataset = sector_dataset();
  LabelMap labels = labels_of(dataset);
  // Only one non-sector candidate remains labeled.
  for (int i = 1; i < 6; ++i) labels.erase("ind-" + std::to_string(i));
  const SupportSet support = select_sector_shots(
      dataset.at("t"), dataset, FusedTable{}, labels, 6, 1);
  EXPECT_EQ(support.shots.size(), 6u);
  int from_sector = 0;
  for (const Shot& shot : support.shots) {
    if (shot.id.rfind("fin-", 0) == 0) ++from_sector;
  }
  EXPECT_EQ(from_sector, 5);
}

TEST(SelectSectorShots, SectorlessTargetDrawsFromGeneralPool) {
  using knnicl_tests::prompt_record;
  std::vector<StartupRecord> records;
  records.push_back(prompt_record("t", 10.0, 1, 1, 1, 1, 1, 0, 1, {}, {},
                                  "no sectors", Outcome::kSuccess));
  for (int i = 0; i < 5; ++i) {
    records.push_back(prompt_record(
        "c-" + std::to_string(i), 10.0, 1, 1, 1, 1, 1, 0, 1, {"Financials"},
        {}, "bank", i % 2 == 0 ? Outcome::kSuccess : Outcome::kFailure));
  }
  const Dataset dataset(std::move(records));
  const LabelMap labels = labels_of(dataset);
  const SupportSet support = select_sector_shots(
      dataset.at("t"), dataset, FusedTable{}, labels, 4, 1);
  EXPECT_EQ(support.shots.size(), 4u);
  std::set<std::string> seen;
  for (const Shot& shot : support.shots) {
    EXPECT_TRUE(seen.insert(shot.id).second);
  }
}

TEST(SelectSectorShots, DeterministicPerSeed) {
  const Dataset dataset = sector_dataset();
  const LabelMap labels = labels_of(dataset);
  auto ids = [&](std::uint64_t seed) {
    std::vector<std::string> out;
    for (const Shot& s : select_sector_shots(dataset.at("t"), dataset,
                                             FusedTable{}, labels, 6, seed)
                             .shots) {
      out.push_back(s.id);
    }
    return out;
  };
  EXPECT_EQ(ids(4), ids(4));
}

}  // namespace
}  // namespace knnicl
