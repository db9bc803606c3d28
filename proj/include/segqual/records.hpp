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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segqual/types.hpp"

namespace segqual {

inline constexpr double kDefaultPrecisionThreshold = 0.5;

/// Low quality iff p <= tau_p.
inline bool is_low_quality(double precision_p, double tau_p = kDefaultPrecisionThreshold) {
  return precision_p <= tau_p;
}

/// One row of the segment table. `features` is aligned to the owning
/// table's feature column list.
struct SegmentRecord {
  std::string image_id;
  SegmentId segment_id = 0;
  ClassId predicted_class = 0;
  std::size_t pixel_count = 0;
  std::size_t image_pixels = 0;
  std::vector<double> features;
  std::optional<double> precision_p;
  std::optional<double> iou;
  std::optional<double> iou_adj;
  std::optional<bool> target_low_quality;
  std::optional<double> uncertainty_score;

  double relative_size() const {
    return image_pixels == 0 ? 0.0 : static_cast<double>(pixel_count) / static_cast<double>(image_pixels);
  }

  friend bool operator==(const SegmentRecord&, const SegmentRecord&) = default;
};

/// CSV column order: image_id, segment_id, predicted_class, pixel_count,
/// image_pixels, <feature columns...>, then precision_p, iou, iou_adj,
/// target_low_quality when any record carries quality, then
/// uncertainty_score when any record is scored.
struct FeatureTable {
  std::vector<std::string> feature_columns;
  std::vector<SegmentRecord> records;

  bool has_quality() const;
  bool has_scores() const;
  std::optional<std::size_t> column_index(const std::string& name) const;

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

std::string table_to_csv(const FeatureTable& table);
FeatureTable table_from_csv(const std::string& text);
std::string table_to_jsonl(const FeatureTable& table);
FeatureTable table_from_jsonl(const std::string& text);

/// Dispatches on extension: ".jsonl" selects JSON lines, anything else CSV.
void write_table(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_table(const std::filesystem::path& path);

}  // namespace segqual
