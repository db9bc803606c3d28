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
#include <string>
#include <vector>

#include "segqual/records.hpp"

namespace segqual {

/// Dense design matrix for the meta-classifiers. Label 1 marks a low-quality
/// segment (the positive class of the uncertainty score).
struct Dataset {
  std::vector<std::string> columns;
  std::size_t rows = 0;
  /// Row-major, rows x columns.
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::vector<double> weights;

  std::size_t cols() const noexcept { return columns.size(); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols(), cols());
  }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  std::size_t positives() const;
};

/// Positions of `wanted` inside `available`; ValidationError names the first
/// missing column.
std::vector<std::size_t> select_columns(std::span<const std::string> available,
                                        std::span<const std::string> wanted);

/// Gathers the requested columns of every record. Records must carry
/// target_low_quality; positive rows get `positive_weight`.
Dataset make_dataset(const FeatureTable& table, std::span<const std::string> columns,
                     double positive_weight = 1.0);

Dataset subset_rows(const Dataset& data, std::span<const std::size_t> rows);

}  // namespace segqual
