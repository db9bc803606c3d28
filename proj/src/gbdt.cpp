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

#include "segqual/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segqual/errors.hpp"
#include "segqual/evaluation.hpp"
#include "segqual/parallel.hpp"
#include "segqual/random.hpp"

namespace segqual {

namespace {

double sigmoid_of(double m) {
  if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

double logloss(double margin, std::uint8_t label) {
  // log(1 + e^m) - y m
  const double softplus = margin > 0 ? margin + std::log1p(std::exp(-margin)) : std::log1p(std::exp(margin));
  return softplus - (label ? margin : 0.0);
}

void check_params(const GbdtParams& p) {
  if (p.max_depth < 0) throw ConfigError("max_depth must be >= 0");
  if (p.num_trees < 0) throw ConfigError("num_trees must be >= 0");
  if (!(p.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(p.subsample > 0.0 && p.subsample <= 1.0)) throw ConfigError("subsample must be in (0, 1]");
  if (p.min_child_weight < 0.0) throw ConfigError("min_child_weight must be >= 0");
  if (p.lambda < 0.0) throw ConfigError("lambda must be >= 0");
}

struct NodeStats {
  double grad = 0.0;
  double hess = 0.0;
};

struct SplitCandidate {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
  NodeStats left;
};

struct ScanState {
  double grad = 0.0;
  double hess = 0.0;
  double last = 0.0;
  bool has_last = false;
};

double leaf_weight(const NodeStats& s, double lambda) {
  const double den = s.hess + lambda;
  return den > 0.0 ? -s.grad / den : 0.0;
}

double score_term(double g, double h, double lambda) {
  const double den = h + lambda;
  return den > 0.0 ? g * g / den : 0.0;
}

// Level-wise exact greedy growth. `sorted[f]` lists the training rows in
// ascending order of feature f; `node_of[r]` is -1 for rows outside the
// sample.
RegressionTree grow_tree(const Dataset& data, const std::vector<std::vector<std::size_t>>& sorted,
                         const std::vector<double>& grad, const std::vector<double>& hess,
                         std::vector<std::int32_t>& node_of, std::span<const std::size_t> sample,
                         const GbdtParams& params) {
  RegressionTree tree;
  std::vector<NodeStats> stats;
  NodeStats root;
  for (const std::size_t r : sample) {
    root.grad += grad[r];
    root.hess += hess[r];
  }
  tree.nodes.emplace_back();
  stats.push_back(root);

  std::vector<std::int32_t> frontier{0};
  for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
    std::vector<std::int32_t> slot(tree.nodes.size(), -1);
    for (std::size_t i = 0; i < frontier.size(); ++i) slot[frontier[i]] = static_cast<std::int32_t>(i);
    std::vector<SplitCandidate> best(frontier.size());
    std::vector<ScanState> scan(frontier.size());

    for (std::size_t f = 0; f < data.cols(); ++f) {
      std::fill(scan.begin(), scan.end(), ScanState{});
      for (const std::size_t r : sorted[f]) {
        const std::int32_t node = node_of[r];
        if (node < 0 || node >= static_cast<std::int32_t>(slot.size())) continue;
        const std::int32_t s = slot[node];
        if (s < 0) continue;
        const double v = data.at(r, f);
        ScanState& st = scan[s];
        if (st.has_last && v > st.last) {
          const NodeStats& total = stats[node];
          const double gr = total.grad - st.grad;
          const double hr = total.hess - st.hess;
          if (st.hess >= params.min_child_weight && hr >= params.min_child_weight) {
            const double gain = score_term(st.grad, st.hess, params.lambda) + score_term(gr, hr, params.lambda) -
                                score_term(total.grad, total.hess, params.lambda);
            if (gain > best[s].gain) {
              best[s] = {gain, static_cast<std::int32_t>(f), st.last, {st.grad, st.hess}};
            }
          }
        }
        st.grad += grad[r];
        st.hess += hess[r];
        st.last = v;
        st.has_last = true;
      }
    }

    std::vector<std::int32_t> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const SplitCandidate& c = best[i];
      if (c.feature < 0) continue;
      const std::int32_t id = frontier[i];
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes[id].feature = c.feature;
      tree.nodes[id].threshold = c.threshold;
      tree.nodes[id].left = left;
      tree.nodes[id].right = left + 1;
      const NodeStats parent = stats[id];
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stats.push_back(c.left);
      stats.push_back({parent.grad - c.left.grad, parent.hess - c.left.hess});
      next.push_back(left);
      next.push_back(left + 1);
    }
    if (next.empty()) break;
    for (const std::size_t r : sample) {
      const TreeNode& n = tree.nodes[node_of[r]];
      if (n.feature >= 0) node_of[r] = data.at(r, n.feature) <= n.threshold ? n.left : n.right;
    }
    frontier = std::move(next);
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].feature < 0) tree.nodes[i].value = params.learning_rate * leaf_weight(stats[i], params.lambda);
  }
  return tree;
}

double stddev(std::span<const double> v, double mean) {
  double sq = 0.0;
  for (const double x : v) sq += (x - mean) * (x - mean);
  return std::sqrt(sq / static_cast<double>(v.size()));
}

}  // namespace

double RegressionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

double GbdtModel::margin(std::span<const double> x) const {
  double m = base_score;
  for (const auto& t : trees) m += t.predict(x);
  return m;
}

GbdtModel fit_gbdt(const Dataset& data, std::span<const std::size_t> rows, const GbdtParams& params,
                   std::uint64_t seed, std::vector<double>* loss_trace) {
  check_params(params);
  double wp = 0.0;
  double wn = 0.0;
  for (const std::size_t r : rows) (data.labels[r] ? wp : wn) += data.weights[r];
  if (wp <= 0.0 || wn <= 0.0) throw TrainingError("gradient boosting needs both classes in the training set");

  GbdtModel model;
  model.params = params;
  model.base_score = std::log(wp / wn);

  std::vector<std::vector<std::size_t>> sorted(data.cols());
  for (std::size_t f = 0; f < data.cols(); ++f) {
    auto& order = sorted[f];
    order.assign(rows.begin(), rows.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = data.at(a, f);
      const double vb = data.at(b, f);
      return va < vb || (va == vb && a < b);
    });
  }

  std::vector<double> margin(data.rows, model.base_score);
  std::vector<double> grad(data.rows, 0.0);
  std::vector<double> hess(data.rows, 0.0);
  std::vector<std::int32_t> node_of(data.rows, -1);
  std::vector<std::size_t> sample;

  auto record_loss = [&] {
    if (loss_trace == nullptr) return;
    double loss = 0.0;
    for (const std::size_t r : rows) loss += data.weights[r] * logloss(margin[r], data.labels[r]);
    loss_trace->push_back(loss);
  };
  record_loss();

  for (int t = 0; t < params.num_trees; ++t) {
    for (const std::size_t r : rows) {
      const double p = sigmoid_of(margin[r]);
      grad[r] = data.weights[r] * (p - (data.labels[r] ? 1.0 : 0.0));
      hess[r] = data.weights[r] * p * (1.0 - p);
    }
    sample.clear();
    if (params.subsample < 1.0) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
      for (const std::size_t r : rows) {
        if (rng.bernoulli(params.subsample)) sample.push_back(r);
      }
    } else {
      sample.assign(rows.begin(), rows.end());
    }
    std::fill(node_of.begin(), node_of.end(), -1);
    for (const std::size_t r : sample) node_of[r] = 0;

    RegressionTree tree = grow_tree(data, sorted, grad, hess, node_of, sample, params);
    for (const std::size_t r : rows) margin[r] += tree.predict(data.row(r));
    model.trees.push_back(std::move(tree));
    record_loss();
  }
  return model;
}

GbdtModel fit_gbdt(const Dataset& data, const GbdtParams& params, std::uint64_t seed,
                   std::vector<double>* loss_trace) {
  std::vector<std::size_t> rows(data.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_gbdt(data, rows, params, seed, loss_trace);
}

std::vector<GbdtParams> default_grid() {
  std::vector<GbdtParams> grid;
  for (const int depth : {2, 3, 4}) {
    for (const int trees : {100, 300}) {
      for (const double lr : {0.1, 0.3}) {
        for (const double mcw : {1.0, 5.0}) {
          for (const double sub : {0.8, 1.0}) {
            GbdtParams p;
            p.max_depth = depth;
            p.num_trees = trees;
            p.learning_rate = lr;
            p.min_child_weight = mcw;
            p.subsample = sub;
            grid.push_back(p);
          }
        }
      }
    }
  }
  return grid;
}

std::vector<std::size_t> stratified_folds(std::span<const std::uint8_t> labels, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross validation needs at least 2 folds");
  std::vector<std::size_t> assignment(labels.size(), 0);
  for (const std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) idx.push_back(i);
    }
    Rng rng(derive_seed(seed, cls + 1u));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    for (std::size_t i = 0; i < idx.size(); ++i) assignment[idx[i]] = i % folds;
  }
  return assignment;
}

namespace {

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> held_out;
};

std::vector<FoldSplit> make_fold_splits(const Dataset& data, std::size_t folds, std::uint64_t seed) {
  const std::size_t pos = data.positives();
  const std::size_t neg = data.rows - pos;
  if (pos < folds || neg < folds) {
    throw TrainingError("cross validation needs at least " + std::to_string(folds) +
                        " segments of each class (have " + std::to_string(pos) + " low-quality, " +
                        std::to_string(neg) + " correct)");
  }
  const auto assignment = stratified_folds(data.labels, folds, seed);
  std::vector<FoldSplit> splits(folds);
  for (std::size_t r = 0; r < data.rows; ++r) {
    for (std::size_t k = 0; k < folds; ++k) (assignment[r] == k ? splits[k].held_out : splits[k].train).push_back(r);
  }
  return splits;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) { return derive_seed(seed, 1000 + fold); }

}  // namespace

std::pair<GbdtModel, TrainReport> train_gbdt(const Dataset& data, std::span<const GbdtParams> grid,
                                             std::size_t folds, std::uint64_t seed, std::size_t threads) {
  if (grid.empty()) throw ConfigError("hyperparameter grid is empty");
  for (const auto& p : grid) check_params(p);
  const auto splits = make_fold_splits(data, folds, seed);

  std::vector<double> fold_auroc(grid.size() * folds, 0.0);
  parallel_for(grid.size() * folds, threads, [&](std::size_t task) {
    const std::size_t g = task / folds;
    const std::size_t k = task % folds;
    const auto model = fit_gbdt(data, splits[k].train, grid[g], fold_seed(seed, k));
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (const std::size_t r : splits[k].held_out) {
      scores.push_back(model.margin(data.row(r)));
      labels.push_back(data.labels[r]);
    }
    fold_auroc[task] = auroc(scores, labels);
  });

  TrainReport report;
  report.seed = seed;
  report.folds = folds;
  std::size_t chosen = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::span<const double> values(fold_auroc.data() + g * folds, folds);
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(folds);
    report.cv_grid.push_back({grid[g], mean, stddev(values, mean)});
    if (mean > report.cv_grid[chosen].mean_auroc) chosen = g;
  }
  report.chosen = grid[chosen];
  return {fit_gbdt(data, report.chosen, seed), report};
}

std::vector<double> cross_val_margins(const Dataset& data, const GbdtParams& params, std::size_t folds,
                                      std::uint64_t seed) {
  const auto splits = make_fold_splits(data, folds, seed);
  std::vector<double> out(data.rows, 0.0);
  for (std::size_t k = 0; k < folds; ++k) {
    const auto model = fit_gbdt(data, splits[k].train, params, fold_seed(seed, k));
    for (const std::size_t r : splits[k].held_out) out[r] = model.margin(data.row(r));
  }
  return out;
}

}  // namespace segqual
