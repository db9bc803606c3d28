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

#include <cstdint>
#include <span>
#include <vector>

#include "segqual/dataset.hpp"

namespace segqual {

struct GbdtParams {
  int max_depth = 3;
  int num_trees = 100;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;
  double subsample = 1.0;
  /// L2 penalty on leaf values.
  double lambda = 1.0;

  friend bool operator==(const GbdtParams&, const GbdtParams&) = default;
};

/// feature < 0 marks a leaf. Rows with x[feature] <= threshold go left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

/// Leaf values already include the learning-rate shrinkage.
struct GbdtModel {
  GbdtParams params;
  double base_score = 0.0;
  std::vector<RegressionTree> trees;

  double margin(std::span<const double> x) const;
  friend bool operator==(const GbdtModel&, const GbdtModel&) = default;
};

/// Second-order boosting on the binary logistic loss with exact greedy
/// splits. Uses only `rows` of `data`; `seed` drives row subsampling. When
/// `loss_trace` is given it receives the weighted training loss after the
/// base score and after every tree.
GbdtModel fit_gbdt(const Dataset& data, std::span<const std::size_t> rows, const GbdtParams& params,
                   std::uint64_t seed, std::vector<double>* loss_trace = nullptr);

GbdtModel fit_gbdt(const Dataset& data, const GbdtParams& params, std::uint64_t seed,
                   std::vector<double>* loss_trace = nullptr);

struct GridResult {
  GbdtParams params;
  double mean_auroc = 0.0;
  double std_auroc = 0.0;
};

struct TrainReport {
  std::vector<GridResult> cv_grid;
  GbdtParams chosen;
  std::uint64_t seed = 0;
  std::size_t folds = 0;
};

/// max_depth {2,3,4} x num_trees {100,300} x learning_rate {0.1,0.3} x
/// min_child_weight {1,5} x subsample {0.8,1.0}.
std::vector<GbdtParams> default_grid();

/// Fold id per row; positives and negatives are shuffled separately and
/// dealt round-robin.
std::vector<std::size_t> stratified_folds(std::span<const std::uint8_t> labels, std::size_t folds,
                                          std::uint64_t seed);

/// Grid search by mean out-of-fold AUROC (ties keep the earlier entry), then
/// a final fit on all rows. Grid cells run on `threads` workers; the result
/// does not depend on the thread count.
std::pair<GbdtModel, TrainReport> train_gbdt(const Dataset& data, std::span<const GbdtParams> grid,
                                             std::size_t folds, std::uint64_t seed,
                                             std::size_t threads = 1);

/// Out-of-fold margins for one parameter set, same fold assignment as
/// train_gbdt.
std::vector<double> cross_val_margins(const Dataset& data, const GbdtParams& params,
                                      std::size_t folds, std::uint64_t seed);

}  // namespace segqual
