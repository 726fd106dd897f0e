#ifndef KNNICL_BASELINES_H_
#define KNNICL_BASELINES_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "knnicl/retrieval.h"
#include "knnicl/types.h"

namespace knnicl {

struct LabeledVector {
  std::string id;
  std::vector<double> values;
  Outcome outcome = Outcome::kFailure;
};

struct TrainOptions {
  double lambda = 1.0;  // L2 strength; corresponds to C = 1/lambda
  int max_iter = 1000;
  double tol = 1e-6;  // on the gradient L2 norm
};

struct LogRegModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 1.0;
  std::array<double, 2> class_weights = {1.0, 1.0};  // indexed by Outcome
  int iterations = 0;
  double final_gradient_norm = 0.0;
  bool converged = false;
};

// n / (2 * n_c) per class, so both classes contribute equal total weight.
std::array<double, 2> balanced_class_weights(
    const std::vector<LabeledVector>& examples);

// Class-weighted logistic loss plus (lambda/2)||w||^2 with the intercept
// unpenalized. `params` holds the weights followed by the intercept. Exposed
// separately from training so the gradient can be checked against finite
// differences.
double logreg_objective(const std::vector<LabeledVector>& examples,
                        const std::vector<double>& params, double lambda,
                        const std::array<double, 2>& class_weights);
std::vector<double> logreg_gradient(const std::vector<LabeledVector>& examples,
                                    const std::vector<double>& params,
                                    double lambda,
                                    const std::array<double, 2>& class_weights);

// L-BFGS with Armijo backtracking from a zero start. Non-convergence within
// max_iter is recorded on the model, not thrown.
LogRegModel train_logreg(const std::vector<LabeledVector>& examples,
                         const TrainOptions& options);

// w.x + b
double logreg_decision(const LogRegModel& model, const std::vector<double>& x);

// Success iff the decision value is >= 0 (probability 0.5 maps to success).
Outcome predict_logreg(const LogRegModel& model, const std::vector<double>& x);

// Uniform sample of k labeled candidates without replacement, target
// excluded; shot order is sample order. Scores carry true cosine similarity
// to the target when both vectors are available, 0 otherwise, so oracle
// backends stay usable.
SupportSet select_random_shots(const std::string& target_id,
                               const FusedTable& table, const LabelMap& labels,
                               int k, std::uint64_t seed);

// floor(k/2) shots sampled from candidates sharing at least one sector with
// the target, the remainder from the rest of the pool; shortfalls on either
// side are filled from the other. No duplicates. A target without sector
// information draws everything from the general pool.
SupportSet select_sector_shots(const StartupRecord& target,
                               const Dataset& dataset, const FusedTable& table,
                               const LabelMap& labels, int k,
                               std::uint64_t seed);

}  // namespace knnicl

#endif  // KNNICL_BASELINES_H_
