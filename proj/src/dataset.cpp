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

#include "segqual/dataset.hpp"

#include <algorithm>
#include <unordered_map>

namespace segqual {

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

std::vector<std::size_t> select_columns(std::span<const std::string> available, std::span<const std::string> wanted) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < available.size(); ++i) index.emplace(available[i], i);
  std::vector<std::size_t> out;
  out.reserve(wanted.size());
  for (const auto& name : wanted) {
    const auto it = index.find(name);
    if (it == index.end()) throw ValidationError("feature column '" + name + "' is missing from the table");
    out.push_back(it->second);
  }
  return out;
}

Dataset make_dataset(const FeatureTable& table, std::span<const std::string> columns, double positive_weight) {
  const auto selected = select_columns(table.feature_columns, columns);
  Dataset data;
  data.columns.assign(columns.begin(), columns.end());
  data.rows = table.records.size();
  data.values.reserve(data.rows * selected.size());
  for (const auto& r : table.records) {
    if (!r.target_low_quality) {
      throw ValidationError("record " + r.image_id + "/" + std::to_string(r.segment_id) +
                            " has no target label (table lacks quality columns?)");
    }
    for (const std::size_t c : selected) data.values.push_back(r.features.at(c));
    const bool positive = *r.target_low_quality;
    data.labels.push_back(positive ? 1 : 0);
    data.weights.push_back(positive ? positive_weight : 1.0);
  }
  return data;
}

Dataset subset_rows(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.columns = data.columns;
  out.rows = rows.size();
  out.values.reserve(rows.size() * data.cols());
  for (const std::size_t r : rows) {
    const auto row = data.row(r);
    out.values.insert(out.values.end(), row.begin(), row.end());
    out.labels.push_back(data.labels[r]);
    out.weights.push_back(data.weights[r]);
  }
  return out;
}

}  // namespace segqual
