// Copyright 2026 The segqual Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segqual/logistic.hpp"

#include <cmath>
#include <numeric>

#include "segqual/errors.hpp"

namespace segqual {

namespace {

// log(1 + exp(m)) without overflow.
double softplus(double m) { return m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m)); }

double logistic(double m) {
  if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

double norm2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

// In-place Cholesky solve of the SPD system a x = b (a is n x n row-major).
bool cholesky_solve(std::vector<double> a, std::vector<double>& b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return true;
}

}  // namespace

double LogisticModel::margin(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw ValidationError("logistic model expects " + std::to_string(weights.size()) + " features, got " +
                          std::to_string(x.size()));
  }
  double m = bias;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (active[j]) m += weights[j] * ((x[j] - means[j]) / scales[j]);
  }
  return m;
}

namespace logistic_detail {

StandardizedProblem standardize(const Dataset& data, double lambda, LogisticModel& model) {
  const std::size_t d = data.cols();
  model.weights.assign(d, 0.0);
  model.means.assign(d, 0.0);
  model.scales.assign(d, 1.0);
  model.active.assign(d, false);
  const double n = static_cast<double>(data.rows);
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) sum += data.at(r, j);
    const double mean = sum / n;
    double sq = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
      const double dv = data.at(r, j) - mean;
      sq += dv * dv;
    }
    const double sd = std::sqrt(sq / n);
    model.means[j] = mean;
    if (sd > 0.0) {
      model.scales[j] = sd;
      model.active[j] = true;
      kept.push_back(j);
    }
  }
  StandardizedProblem p;
  p.rows = data.rows;
  p.dims = kept.size();
  p.lambda = lambda;
  p.z.reserve(p.rows * p.dims);
  for (std::size_t r = 0; r < data.rows; ++r) {
    for (const std::size_t j : kept) p.z.push_back((data.at(r, j) - model.means[j]) / model.scales[j]);
    p.y.push_back(data.labels[r] ? 1.0 : 0.0);
    p.c.push_back(data.weights[r]);
  }
  return p;
}

double objective(const StandardizedProblem& problem, std::span<const double> params) {
  const std::size_t d = problem.dims;
  const double bias = params[d];
  double loss = 0.0;
  for (std::size_t r = 0; r < problem.rows; ++r) {
    double m = bias;
    for (std::size_t j = 0; j < d; ++j) m += params[j] * problem.z[r * d + j];
    loss += problem.c[r] * (softplus(m) - problem.y[r] * m);
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < d; ++j) reg += params[j] * params[j];
  return loss + 0.5 * problem.lambda * reg;
}

std::vector<double> gradient(const StandardizedProblem& problem, std::span<const double> params) {
  const std::size_t d = problem.dims;
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t r = 0; r < problem.rows; ++r) {
    double m = params[d];
    for (std::size_t j = 0; j < d; ++j) m += params[j] * problem.z[r * d + j];
    const double residual = problem.c[r] * (logistic(m) - problem.y[r]);
    for (std::size_t j = 0; j < d; ++j) g[j] += residual * problem.z[r * d + j];
    g[d] += residual;
  }
  for (std::size_t j = 0; j < d; ++j) g[j] += problem.lambda * params[j];
  return g;
}

}  // namespace logistic_detail

LogisticModel train_logistic(const Dataset& data, const LogisticOptions& options, LogisticFitInfo* info) {
  const std::size_t pos = data.positives();
  if (pos == 0 || pos == data.rows) throw TrainingError("logistic regression needs both classes in the training set");
  if (options.lambda < 0.0) throw ConfigError("lambda must be non-negative");

  LogisticModel model;
  const auto problem = logistic_detail::standardize(data, options.lambda, model);
  const std::size_t d = problem.dims;
  const std::size_t n = d + 1;

  // Start from the weighted prior log-odds.
  std::vector<double> params(n, 0.0);
  {
    double wp = 0.0;
    double wn = 0.0;
    for (std::size_t r = 0; r < problem.rows; ++r) (problem.y[r] > 0.5 ? wp : wn) += problem.c[r];
    params[d] = std::log(wp / wn);
  }

  double f = logistic_detail::objective(problem, params);
  std::vector<double> g = logistic_detail::gradient(problem, params);
  int iter = 0;
  for (; iter < options.max_iterations && norm2(g) >= options.gradient_tolerance; ++iter) {
    std::vector<double> hess(n * n, 0.0);
    for (std::size_t r = 0; r < problem.rows; ++r) {
      double m = params[d];
      const double* z = &problem.z[r * d];
      for (std::size_t j = 0; j < d; ++j) m += params[j] * z[j];
      const double s = logistic(m);
      const double w = problem.c[r] * s * (1.0 - s);
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b <= a; ++b) hess[a * n + b] += w * z[a] * z[b];
        hess[d * n + a] += w * z[a];
      }
      hess[d * n + d] += w;
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < a; ++b) hess[b * n + a] = hess[a * n + b];
    }
    for (std::size_t j = 0; j < d; ++j) hess[j * n + j] += problem.lambda;

    std::vector<double> step(g);
    double ridge = 0.0;
    while (!cholesky_solve(hess, step, n)) {
      ridge = ridge == 0.0 ? 1e-10 : ridge * 10.0;
      for (std::size_t j = 0; j < n; ++j) hess[j * n + j] += ridge;
      step = g;
      if (ridge > 1e6) throw TrainingError("logistic Hessian is singular");
    }
    // Backtracking (Armijo) line search along the Newton direction.
    const double slope = -std::inner_product(g.begin(), g.end(), step.begin(), 0.0);
    double t = 1.0;
    std::vector<double> trial(n);
    double f_trial = f;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = params[j] - t * step[j];
      f_trial = logistic_detail::objective(problem, trial);
      if (f_trial <= f + 1e-4 * t * slope) break;
      t *= 0.5;
    }
    if (!(f_trial <= f)) break;
    params = trial;
    f = f_trial;
    g = logistic_detail::gradient(problem, params);
  }

  std::size_t k = 0;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    if (model.active[j]) model.weights[j] = params[k++];
  }
  model.bias = params[d];
  if (info != nullptr) {
    info->iterations = iter;
    info->gradient_norm = norm2(g);
    info->objective = f;
  }
  return model;
}

}  // namespace segqual
