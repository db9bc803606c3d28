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

#include "segqual/model.hpp"

#include <cmath>

#include "json.hpp"
#include "segqual/errors.hpp"
#include "segqual/npy.hpp"

namespace segqual {

namespace {

using nlohmann::ordered_json;

ordered_json params_to_json(const GbdtParams& p) {
  ordered_json j;
  j["max_depth"] = p.max_depth;
  j["num_trees"] = p.num_trees;
  j["learning_rate"] = p.learning_rate;
  j["min_child_weight"] = p.min_child_weight;
  j["subsample"] = p.subsample;
  j["lambda"] = p.lambda;
  return j;
}

GbdtParams params_from_json(const ordered_json& j) {
  GbdtParams p;
  p.max_depth = j.at("max_depth").get<int>();
  p.num_trees = j.at("num_trees").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.min_child_weight = j.at("min_child_weight").get<double>();
  p.subsample = j.at("subsample").get<double>();
  p.lambda = j.at("lambda").get<double>();
  return p;
}

std::vector<std::size_t> model_positions(const MetaModel& model, std::span<const std::string> record_columns) {
  std::vector<std::size_t> pos;
  pos.reserve(model.feature_set.columns.size());
  for (const auto& name : model.feature_set.columns) {
    std::size_t i = 0;
    while (i < record_columns.size() && record_columns[i] != name) ++i;
    if (i == record_columns.size()) {
      throw ValidationError("feature table lacks column '" + name + "' required by the " +
                            std::string(model.feature_set.name()) + " model");
    }
    pos.push_back(i);
  }
  return pos;
}

double score_with(const MetaModel& model, const SegmentRecord& record, std::span<const std::size_t> pos,
                  std::vector<double>& scratch) {
  scratch.resize(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (pos[i] >= record.features.size()) {
      throw ValidationError("record " + record.image_id + "/" + std::to_string(record.segment_id) +
                            " has too few feature values");
    }
    scratch[i] = record.features[pos[i]];
  }
  return model.score(scratch);
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double MetaModel::margin(std::span<const double> features) const {
  if (features.size() != feature_set.columns.size()) {
    throw ValidationError("model expects " + std::to_string(feature_set.columns.size()) + " features, got " +
                          std::to_string(features.size()));
  }
  return std::visit([&](const auto& m) { return m.margin(features); }, classifier);
}

double MetaModel::score(std::span<const double> features) const { return sigmoid(margin(features)); }

void score_table(const MetaModel& model, FeatureTable& table) {
  const auto pos = model_positions(model, table.feature_columns);
  std::vector<double> scratch;
  for (auto& r : table.records) r.uncertainty_score = score_with(model, r, pos, scratch);
}

double score_record(const MetaModel& model, const SegmentRecord& record,
                    std::span<const std::string> record_columns) {
  const auto pos = model_positions(model, record_columns);
  std::vector<double> scratch;
  return score_with(model, record, pos, scratch);
}

std::string model_to_json(const MetaModel& model) {
  ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = std::string(model.kind());
  j["feature_set"] = {{"name", std::string(model.feature_set.name())}, {"columns", model.feature_set.columns}};
  if (const auto* lr = std::get_if<LogisticModel>(&model.classifier)) {
    ordered_json m;
    m["weights"] = lr->weights;
    m["bias"] = lr->bias;
    m["means"] = lr->means;
    m["scales"] = lr->scales;
    m["active"] = lr->active;
    j["logistic"] = std::move(m);
  } else {
    const auto& gb = std::get<GbdtModel>(model.classifier);
    ordered_json m;
    m["params"] = params_to_json(gb.params);
    m["base_score"] = gb.base_score;
    ordered_json trees = ordered_json::array();
    for (const auto& t : gb.trees) {
      ordered_json nodes = ordered_json::array();
      for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
      trees.push_back(std::move(nodes));
    }
    m["trees"] = std::move(trees);
    j["gbdt"] = std::move(m);
  }
  return j.dump(1) + "\n";
}

MetaModel model_from_json(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw FormatError("unsupported model format version " + std::to_string(version) + " (supported: " +
                        std::to_string(kModelFormatVersion) + ")");
    }
    MetaModel model;
    const auto& fs = j.at("feature_set");
    model.feature_set.kind = parse_feature_set(fs.at("name").get<std::string>());
    model.feature_set.columns = fs.at("columns").get<std::vector<std::string>>();
    const auto kind = j.at("kind").get<std::string>();
    const std::size_t d = model.feature_set.columns.size();
    if (kind == "logistic") {
      const auto& m = j.at("logistic");
      LogisticModel lr;
      lr.weights = m.at("weights").get<std::vector<double>>();
      lr.bias = m.at("bias").get<double>();
      lr.means = m.at("means").get<std::vector<double>>();
      lr.scales = m.at("scales").get<std::vector<double>>();
      lr.active = m.at("active").get<std::vector<bool>>();
      if (lr.weights.size() != d || lr.means.size() != d || lr.scales.size() != d || lr.active.size() != d) {
        throw FormatError("logistic parameters do not match the feature columns");
      }
      model.classifier = std::move(lr);
    } else if (kind == "gbdt") {
      const auto& m = j.at("gbdt");
      GbdtModel gb;
      gb.params = params_from_json(m.at("params"));
      gb.base_score = m.at("base_score").get<double>();
      for (const auto& jt : m.at("trees")) {
        RegressionTree tree;
        for (const auto& jn : jt) {
          TreeNode n;
          n.feature = jn.at(0).get<std::int32_t>();
          n.threshold = jn.at(1).get<double>();
          n.left = jn.at(2).get<std::int32_t>();
          n.right = jn.at(3).get<std::int32_t>();
          n.value = jn.at(4).get<double>();
          tree.nodes.push_back(n);
        }
        const auto count = static_cast<std::int32_t>(tree.nodes.size());
        if (count == 0) throw FormatError("empty tree in model");
        for (std::int32_t i = 0; i < count; ++i) {
          const auto& n = tree.nodes[i];
          if (n.feature >= static_cast<std::int32_t>(d)) throw FormatError("tree references unknown feature");
          if (n.feature >= 0 && (n.left <= i || n.right <= i || n.left >= count || n.right >= count)) {
            throw FormatError("malformed tree links");
          }
        }
        gb.trees.push_back(std::move(tree));
      }
      model.classifier = std::move(gb);
    } else {
      throw FormatError("unknown model kind '" + kind + "'");
    }
    return model;
  } catch (const ordered_json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const MetaModel& model, const std::filesystem::path& path) { write_text(path, model_to_json(model)); }

MetaModel load_model(const std::filesystem::path& path) { return model_from_json(read_text(path)); }

std::string report_to_json(const TrainReport& report) {
  ordered_json j;
  j["seed"] = report.seed;
  j["folds"] = report.folds;
  j["chosen"] = params_to_json(report.chosen);
  ordered_json grid = ordered_json::array();
  for (const auto& g : report.cv_grid) {
    ordered_json e = params_to_json(g.params);
    e["mean_auroc"] = g.mean_auroc;
    e["std_auroc"] = g.std_auroc;
    grid.push_back(std::move(e));
  }
  j["cv_grid"] = std::move(grid);
  return j.dump(1) + "\n";
}

}  // namespace segqual
