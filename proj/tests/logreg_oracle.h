#ifndef KNNICL_TESTS_LOGREG_ORACLE_H_
#define KNNICL_TESTS_LOGREG_ORACLE_H_

#include <cmath>
#include <cstddef>
#include <vector>

#include "knnicl/baselines.h"

namespace knnicl_tests {

// Reference solver for class-weighted ridge logistic regression, written
// independently of the library's trainer: damped Newton iterations with an
// explicit Hessian and Gaussian elimination. Small dense problems only.
//
// Model: p = sigmoid(w.x + b), loss = sum_i cw[y_i] * log-loss_i
//        + (lambda/2)*||w||^2 with b unpenalized,
//        cw[c] = n / (2 * n_c).
// Returns [w; b].
inline std::vector<double> newton_logreg_params(
    const std::vector<knnicl::LabeledVector>& examples, double lambda) {
  const std::size_t d = examples.front().values.size();
  const std::size_t dim = d + 1;

  double n_pos = 0.0;
  double n_neg = 0.0;
  for (const auto& e : examples) {
    (e.outcome == knnicl::Outcome::kSuccess ? n_pos : n_neg) += 1.0;
  }
  const double n = n_pos + n_neg;
  const double w_pos = n / (2.0 * n_pos);
  const double w_neg = n / (2.0 * n_neg);

  auto objective = [&](const std::vector<double>& params) {
    double loss = 0.0;
    for (const auto& e : examples) {
      double z = params[d];
      for (std::size_t i = 0; i < d; ++i) z += params[i] * e.values[i];
      const double cw = e.outcome == knnicl::Outcome::kSuccess ? w_pos : w_neg;
      const double a = e.outcome == knnicl::Outcome::kSuccess ? -z : z;
      loss += cw * (std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))));
    }
    double ridge = 0.0;
    for (std::size_t i = 0; i < d; ++i) ridge += params[i] * params[i];
    return loss + 0.5 * lambda * ridge;
  };

  std::vector<double> params(dim, 0.0);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> grad(dim, 0.0);
    std::vector<std::vector<double>> hess(dim, std::vector<double>(dim, 0.0));
    for (const auto& e : examples) {
      double z = params[d];
      for (std::size_t i = 0; i < d; ++i) z += params[i] * e.values[i];
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double y = e.outcome == knnicl::Outcome::kSuccess ? 1.0 : 0.0;
      const double cw = e.outcome == knnicl::Outcome::kSuccess ? w_pos : w_neg;
      const double g = cw * (p - y);
      const double h = cw * p * (1.0 - p);
      for (std::size_t i = 0; i < dim; ++i) {
        const double xi = i < d ? e.values[i] : 1.0;
        grad[i] += g * xi;
        for (std::size_t j = 0; j <= i; ++j) {
          const double xj = j < d ? e.values[j] : 1.0;
          hess[i][j] += h * xi * xj;
        }
      }
    }
    double grad_norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      if (i < d) {
        grad[i] += lambda * params[i];
        hess[i][i] += lambda;
      }
      grad_norm += grad[i] * grad[i];
    }
    if (std::sqrt(grad_norm) < 1e-11) break;
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i + 1; j < dim; ++j) hess[i][j] = hess[j][i];
    }

    // Solve hess * delta = grad with partial pivoting.
    std::vector<double> delta = grad;
    for (std::size_t col = 0; col < dim; ++col) {
      std::size_t pivot = col;
      for (std::size_t row = col + 1; row < dim; ++row) {
        if (std::abs(hess[row][col]) > std::abs(hess[pivot][col])) pivot = row;
      }
      std::swap(hess[col], hess[pivot]);
      std::swap(delta[col], delta[pivot]);
      for (std::size_t row = col + 1; row < dim; ++row) {
        const double factor = hess[row][col] / hess[col][col];
        for (std::size_t j = col; j < dim; ++j) {
          hess[row][j] -= factor * hess[col][j];
        }
        delta[row] -= factor * delta[col];
      }
    }
    for (std::size_t col = dim; col-- > 0;) {
      for (std::size_t j = col + 1; j < dim; ++j) {
        delta[col] -= hess[col][j] * delta[j];
      }
      delta[col] /= hess[col][col];
    }

    // Damped step: halve until the objective stops increasing.
    const double before = objective(params);
    double step = 1.0;
    std::vector<double> next(dim);
    for (int halving = 0; halving < 40; ++halving) {
      for (std::size_t i = 0; i < dim; ++i) {
        next[i] = params[i] - step * delta[i];
      }
      if (objective(next) <= before) break;
      step *= 0.5;
    }
    params = next;
  }
  return params;
}

}  // namespace knnicl_tests

#endif  // KNNICL_TESTS_LOGREG_ORACLE_H_
