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

#pragma once

#include <span>
#include <vector>

#include "segqual/dataset.hpp"

namespace segqual {

struct LogisticOptions {
  /// L2 strength on the standardized weights; the bias is not penalized.
  double lambda = 1.0;
  double gradient_tolerance = 1e-6;
  int max_iterations = 10000;
};

/// Logistic regression on standardized inputs. Columns with zero spread on
/// the training data are dropped (`active` false, weight 0).
struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> means;
  std::vector<double> scales;
  std::vector<bool> active;

  /// Log-odds of the low-quality class.
  double margin(std::span<const double> x) const;

  friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

struct LogisticFitInfo {
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
};

/// Minimizes sum_i w_i * logloss_i + lambda/2 * ||w||^2 by damped Newton
/// steps. Throws TrainingError when only one class is present.
LogisticModel train_logistic(const Dataset& data, const LogisticOptions& options = {},
                             LogisticFitInfo* info = nullptr);

namespace logistic_detail {

/// Standardized design used by the optimizer. Exposed for gradient checks.
struct StandardizedProblem {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::vector<double> z;  // rows x dims
  std::vector<double> y;
  std::vector<double> c;
  double lambda = 1.0;
};

StandardizedProblem standardize(const Dataset& data, double lambda, LogisticModel& model);

/// params = [w_0 .. w_{d-1}, bias].
double objective(const StandardizedProblem& problem, std::span<const double> params);
std::vector<double> gradient(const StandardizedProblem& problem, std::span<const double> params);

}  // namespace logistic_detail

}  // namespace segqual
