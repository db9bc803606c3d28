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

#include <string>
#include <string_view>
#include <vector>

#include "segqual/geometry.hpp"
#include "segqual/records.hpp"
#include "segqual/uncertainty.hpp"

namespace segqual {

enum class FeatureSetKind { all, reduced, uncertainty_only };

std::string_view to_string(FeatureSetKind kind);
/// Throws ConfigError for unknown names.
FeatureSetKind parse_feature_set(std::string_view name);

/// Column layout of one feature set. Each set is a prefix of the next larger
/// one:
///   uncertainty_only: mean_<m> for m in one_minus_max, entropy,
///                     one_minus_margin[, gradient_norm]
///   reduced:          + relative_size, class_0 .. class_{N-1}
///   all:              + std_<m>, then mean_<m>_boundary, std_<m>_boundary,
///                     mean_<m>_inner, std_<m>_inner per measure, inner_empty
struct FeatureSetSpec {
  FeatureSetKind kind = FeatureSetKind::reduced;
  std::vector<std::string> columns;

  std::string_view name() const { return to_string(kind); }
  friend bool operator==(const FeatureSetSpec&, const FeatureSetSpec&) = default;
};

FeatureSetSpec make_feature_set(FeatureSetKind kind, std::size_t num_classes, bool with_gradient);

/// Aggregates heat maps over one segment. Standard deviations are population
/// deviations; empty inner regions take the full-segment statistics and set
/// inner_empty. The returned record has identity fields filled except
/// image_id.
SegmentRecord aggregate_segment_features(const UncertaintyHeatmaps& heatmaps, const Segment& segment,
                                         std::size_t image_pixels, const FeatureSetSpec& spec,
                                         std::size_t num_classes);

}  // namespace segqual
