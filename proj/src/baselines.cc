#include "knnicl/baselines.h"

#include <algorithm>
#include <cmath>
#include <deque>

#include "knnicl/rng.h"

namespace knnicl {
namespace {

// log(1 + exp(a)) without overflow for large |a|.
double log1p_exp(double a) {
  return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a)));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm2(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

void check_examples(const std::vector<LabeledVector>& examples) {
  if (examples.empty()) {
    throw ValidationError("logistic regression needs training examples");
  }
  const std::size_t dim = examples.front().values.size();
  std::array<std::size_t, 2> counts = {0, 0};
  for (const LabeledVector& e : examples) {
    if (e.values.size() != dim) {
      throw ValidationError("training example \"" + e.id +
                            "\" has mismatched dimension");
    }
    ++counts[static_cast<int>(e.outcome)];
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw ValidationError(
        "logistic regression needs at least one example of each class");
  }
}

// Raw decision value for params = [w; b].
double decision(const std::vector<double>& params,
                const std::vector<double>& x) {
  double z = params.back();
  for (std::size_t i = 0; i < x.size(); ++i) z += params[i] * x[i];
  return z;
}

struct LbfgsPair {
  std::vector<double> s;
  std::vector<double> y;
  double rho = 0.0;
};

// Two-loop recursion: approximates -H*g with implicit curvature memory.
std::vector<double> lbfgs_direction(const std::vector<double>& gradient,
                                    const std::deque<LbfgsPair>& memory) {
  std::vector<double> q = gradient;
  std::vector<double> alpha(memory.size(), 0.0);
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * dot(memory[i].s, q);
    for (std::size_t j = 0; j < q.size(); ++j) {
      q[j] -= alpha[i] * memory[i].y[j];
    }
  }
  if (!memory.empty()) {
    const LbfgsPair& last = memory.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * dot(memory[i].y, q);
    for (std::size_t j = 0; j < q.size(); ++j) {
      q[j] += (alpha[i] - beta) * memory[i].s[j];
    }
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

std::array<double, 2> balanced_class_weights(
    const std::vector<LabeledVector>& examples) {
  std::array<double, 2> counts = {0.0, 0.0};
  for (const LabeledVector& e : examples) {
    counts[static_cast<int>(e.outcome)] += 1.0;
  }
  const double n = counts[0] + counts[1];
  return {n / (2.0 * counts[0]), n / (2.0 * counts[1])};
}

double logreg_objective(const std::vector<LabeledVector>& examples,
                        const std::vector<double>& params, double lambda,
                        const std::array<double, 2>& class_weights) {
  double loss = 0.0;
  for (const LabeledVector& e : examples) {
    const double z = decision(params, e.values);
    const double weight = class_weights[static_cast<int>(e.outcome)];
    // y=1: log(1+exp(-z)); y=0: log(1+exp(z))
    loss += weight *
            log1p_exp(e.outcome == Outcome::kSuccess ? -z : z);
  }
  double penalty = 0.0;
  for (std::size_t i = 0; i + 1 < params.size(); ++i) {
    penalty += params[i] * params[i];
  }
  return loss + 0.5 * lambda * penalty;
}

std::vector<double> logreg_gradient(const std::vector<LabeledVector>& examples,
                                    const std::vector<double>& params,
                                    double lambda,
                                    const std::array<double, 2>& class_weights) {
  std::vector<double> grad(params.size(), 0.0);
  for (const LabeledVector& e : examples) {
    const double z = decision(params, e.values);
    const double p = 1.0 / (1.0 + std::exp(-z));
    const double y = e.outcome == Outcome::kSuccess ? 1.0 : 0.0;
    const double factor = class_weights[static_cast<int>(e.outcome)] * (p - y);
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      grad[i] += factor * e.values[i];
    }
    grad.back() += factor;
  }
  for (std::size_t i = 0; i + 1 < params.size(); ++i) {
    grad[i] += lambda * params[i];
  }
  return grad;
}

LogRegModel train_logreg(const std::vector<LabeledVector>& examples,
                         const TrainOptions& options) {
  check_examples(examples);
  if (!(options.lambda > 0.0)) {
    throw ValidationError("lambda must be positive");
  }
  if (options.max_iter < 1) {
    throw ValidationError("max_iter must be at least 1");
  }
  const std::array<double, 2> class_weights = balanced_class_weights(examples);
  const std::size_t dim = examples.front().values.size();
  std::vector<double> params(dim + 1, 0.0);
  std::vector<double> gradient =
      logreg_gradient(examples, params, options.lambda, class_weights);
  double objective =
      logreg_objective(examples, params, options.lambda, class_weights);

  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  std::deque<LbfgsPair> memory;
  int iteration = 0;
  bool converged = norm2(gradient) < options.tol;
  while (!converged && iteration < options.max_iter) {
    std::vector<double> direction = lbfgs_direction(gradient, memory);
    double slope = dot(gradient, direction);
    if (slope >= 0.0) {
      // Memory went stale numerically; fall back to steepest descent.
      memory.clear();
      direction = gradient;
      for (double& v : direction) v = -v;
      slope = -dot(gradient, gradient);
    }
    double step = 1.0;
    std::vector<double> next(params.size());
    double next_objective = objective;
    bool advanced = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        next[i] = params[i] + step * direction[i];
      }
      next_objective =
          logreg_objective(examples, next, options.lambda, class_weights);
      if (next_objective <= objective + kArmijo * step * slope) {
        advanced = true;
        break;
      }
      step *= 0.5;
    }
    ++iteration;
    if (!advanced) break;  // line search stuck at numerical precision

    std::vector<double> next_gradient =
        logreg_gradient(examples, next, options.lambda, class_weights);
    LbfgsPair pair;
    pair.s.resize(params.size());
    pair.y.resize(params.size());
    double sy = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      pair.s[i] = next[i] - params[i];
      pair.y[i] = next_gradient[i] - gradient[i];
      sy += pair.s[i] * pair.y[i];
    }
    if (sy > 1e-12) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (memory.size() > kMemory) memory.pop_front();
    }
    params = std::move(next);
    gradient = std::move(next_gradient);
    objective = next_objective;
    converged = norm2(gradient) < options.tol;
  }

  LogRegModel model;
  model.weights.assign(params.begin(), params.end() - 1);
  model.intercept = params.back();
  model.lambda = options.lambda;
  model.class_weights = class_weights;
  model.iterations = iteration;
  model.final_gradient_norm = norm2(gradient);
  model.converged = converged;
  return model;
}

double logreg_decision(const LogRegModel& model, const std::vector<double>& x) {
  if (x.size() != model.weights.size()) {
    throw ValidationError("feature dimension " + std::to_string(x.size()) +
                          " does not match model dimension " +
                          std::to_string(model.weights.size()));
  }
  return dot(model.weights, x) + model.intercept;
}

Outcome predict_logreg(const LogRegModel& model, const std::vector<double>& x) {
  return logreg_decision(model, x) >= 0.0 ? Outcome::kSuccess
                                          : Outcome::kFailure;
}

namespace {

double shot_score(const FusedTable& table, const std::string& target_id,
                  const std::string& candidate_id) {
  auto target = table.find(target_id);
  auto candidate = table.find(candidate_id);
  if (target == table.end() || candidate == table.end()) return 0.0;
  return cosine_similarity(target->second.values, candidate->second.values);
}

std::vector<std::string> pool_without_target(const LabelMap& labels,
                                             const std::string& target_id,
                                             int k) {
  std::vector<std::string> pool;
  pool.reserve(labels.size());
  for (const auto& [id, outcome] : labels) {
    (void)outcome;
    if (id != target_id) pool.push_back(id);
  }
  if (static_cast<int>(pool.size()) < k) {
    throw ValidationError("candidate pool has " +
                          std::to_string(pool.size()) +
                          " records, fewer than k=" + std::to_string(k));
  }
  return pool;
}

}  // namespace

SupportSet select_random_shots(const std::string& target_id,
                               const FusedTable& table, const LabelMap& labels,
                               int k, std::uint64_t seed) {
  if (k < 1) {
    throw ValidationError("shot count must be positive, got " +
                          std::to_string(k));
  }
  std::vector<std::string> pool = pool_without_target(labels, target_id, k);
  Rng rng(derive_seed(seed, "random_shots"));
  rng.shuffle(pool);
  SupportSet support;
  support.target_id = target_id;
  support.k = k;
  for (int i = 0; i < k; ++i) {
    const std::string& id = pool[static_cast<std::size_t>(i)];
    support.shots.push_back(
        Shot{id, labels.at(id), shot_score(table, target_id, id)});
  }
  return support;
}

SupportSet select_sector_shots(const StartupRecord& target,
                               const Dataset& dataset, const FusedTable& table,
                               const LabelMap& labels, int k,
                               std::uint64_t seed) {
  if (k < 1) {
    throw ValidationError("shot count must be positive, got " +
                          std::to_string(k));
  }
  std::vector<std::string> pool = pool_without_target(labels, target.id, k);
  std::vector<std::string> sector_pool;
  std::vector<std::string> general_pool;
  for (const std::string& id : pool) {
    const StartupRecord& record = dataset.at(id);
    bool overlap = false;
    if (!target.sectors.empty()) {
      for (const std::string& sector : record.sectors) {
        if (target.sectors.count(sector) > 0) {
          overlap = true;
          break;
        }
      }
    }
    (overlap ? sector_pool : general_pool).push_back(id);
  }

  Rng rng(derive_seed(seed, "sector_shots"));
  rng.shuffle(sector_pool);
  rng.shuffle(general_pool);

  const auto half = static_cast<std::size_t>(k / 2);
  const std::size_t from_sector = std::min(half, sector_pool.size());
  std::size_t from_general =
      std::min(static_cast<std::size_t>(k) - from_sector, general_pool.size());
  // If the general pool cannot cover the remainder, backfill with the unused
  // tail of the sector pool; total feasibility is guaranteed by pool >= k.
  const std::size_t backfill =
      static_cast<std::size_t>(k) - from_sector - from_general;

  SupportSet support;
  support.target_id = target.id;
  support.k = k;
  auto add = [&](const std::string& id) {
    support.shots.push_back(
        Shot{id, labels.at(id), shot_score(table, target.id, id)});
  };
  for (std::size_t i = 0; i < from_sector; ++i) add(sector_pool[i]);
  for (std::size_t i = 0; i < from_general; ++i) add(general_pool[i]);
  for (std::size_t i = 0; i < backfill; ++i) add(sector_pool[from_sector + i]);
  return support;
}

}  // namespace knnicl
