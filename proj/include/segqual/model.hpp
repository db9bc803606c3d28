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

#include <filesystem>
#include <span>
#include <string>
#include <variant>

#include "segqual/features.hpp"
#include "segqual/gbdt.hpp"
#include "segqual/logistic.hpp"

namespace segqual {

inline constexpr int kModelFormatVersion = 1;

struct MetaModel {
  FeatureSetSpec feature_set;
  std::variant<LogisticModel, GbdtModel> classifier;

  bool is_gbdt() const { return std::holds_alternative<GbdtModel>(classifier); }
  std::string_view kind() const { return is_gbdt() ? "gbdt" : "logistic"; }

  /// Log-odds of low quality for features aligned to feature_set.columns.
  double margin(std::span<const double> features) const;
  /// Uncertainty in [0, 1]; higher means more likely low quality.
  double score(std::span<const double> features) const;

  friend bool operator==(const MetaModel&, const MetaModel&) = default;
};

double sigmoid(double x);

/// Scores every record of `table` and stores uncertainty_score. The table
/// must contain every model column (any order).
void score_table(const MetaModel& model, FeatureTable& table);
double score_record(const MetaModel& model, const SegmentRecord& record,
                    std::span<const std::string> record_columns);

std::string model_to_json(const MetaModel& model);
MetaModel model_from_json(const std::string& text);
void save_model(const MetaModel& model, const std::filesystem::path& path);
MetaModel load_model(const std::filesystem::path& path);

std::string report_to_json(const TrainReport& report);

}  // namespace segqual
