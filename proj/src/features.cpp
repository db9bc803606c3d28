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

#include "segqual/features.hpp"

#include <cmath>

namespace segqual {

namespace {

constexpr const char* kMeasureNames[] = {"one_minus_max", "entropy", "one_minus_margin", "gradient_norm"};

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

// Two-pass mean and population deviation.
template <typename ValueAt>
Stats region_stats(std::span<const PixelIndex> pixels, ValueAt value_at) {
  Stats s;
  if (pixels.empty()) return s;
  double sum = 0.0;
  for (const PixelIndex p : pixels) sum += value_at(p);
  s.mean = sum / static_cast<double>(pixels.size());
  double sq = 0.0;
  for (const PixelIndex p : pixels) {
    const double d = value_at(p) - s.mean;
    sq += d * d;
  }
  s.std = std::sqrt(sq / static_cast<double>(pixels.size()));
  return s;
}

template <typename ValueFn>
void append_region_features(SegmentRecord& rec, const Segment& segment, const Stats* full, std::size_t measures,
                            const ValueFn& value_fn) {
  for (std::size_t m = 0; m < measures; ++m) rec.features.push_back(full[m].std);
  const bool inner_empty = segment.inner_pixels.empty();
  for (std::size_t m = 0; m < measures; ++m) {
    const Stats boundary = region_stats(segment.boundary_pixels, value_fn(m));
    const Stats inner = inner_empty ? full[m] : region_stats(segment.inner_pixels, value_fn(m));
    rec.features.push_back(boundary.mean);
    rec.features.push_back(boundary.std);
    rec.features.push_back(inner.mean);
    rec.features.push_back(inner.std);
  }
  rec.features.push_back(inner_empty ? 1.0 : 0.0);
}

}  // namespace

std::string_view to_string(FeatureSetKind kind) {
  switch (kind) {
    case FeatureSetKind::all:
      return "all";
    case FeatureSetKind::reduced:
      return "reduced";
    case FeatureSetKind::uncertainty_only:
      return "uncertainty_only";
  }
  return "unknown";
}

FeatureSetKind parse_feature_set(std::string_view name) {
  if (name == "all") return FeatureSetKind::all;
  if (name == "reduced") return FeatureSetKind::reduced;
  if (name == "uncertainty_only") return FeatureSetKind::uncertainty_only;
  throw ConfigError("unknown feature set '" + std::string(name) + "' (expected all, reduced or uncertainty_only)");
}

FeatureSetSpec make_feature_set(FeatureSetKind kind, std::size_t num_classes, bool with_gradient) {
  const std::size_t measures = with_gradient ? 4 : 3;
  FeatureSetSpec spec;
  spec.kind = kind;
  auto& cols = spec.columns;
  for (std::size_t m = 0; m < measures; ++m) cols.push_back(std::string("mean_") + kMeasureNames[m]);
  if (kind == FeatureSetKind::uncertainty_only) return spec;

  cols.emplace_back("relative_size");
  for (std::size_t k = 0; k < num_classes; ++k) cols.push_back("class_" + std::to_string(k));
  if (kind == FeatureSetKind::reduced) return spec;

  for (std::size_t m = 0; m < measures; ++m) cols.push_back(std::string("std_") + kMeasureNames[m]);
  for (std::size_t m = 0; m < measures; ++m) {
    const std::string name = kMeasureNames[m];
    cols.push_back("mean_" + name + "_boundary");
    cols.push_back("std_" + name + "_boundary");
    cols.push_back("mean_" + name + "_inner");
    cols.push_back("std_" + name + "_inner");
  }
  cols.emplace_back("inner_empty");
  return spec;
}

SegmentRecord aggregate_segment_features(const UncertaintyHeatmaps& heatmaps, const Segment& segment,
                                         std::size_t image_pixels, const FeatureSetSpec& spec,
                                         std::size_t num_classes) {
  if (segment.pixels.empty()) throw ContractViolation("aggregate_segment_features: empty segment");
  const bool with_gradient = spec.columns.size() > 3 && spec.columns[3] == "mean_gradient_norm";
  if (with_gradient && !heatmaps.gradient_norm) {
    throw ValidationError("feature set expects gradient-norm columns but no feature tensor was provided");
  }
  const std::size_t measures = with_gradient ? 4 : 3;

  SegmentRecord rec;
  rec.segment_id = segment.id;
  rec.predicted_class = segment.cls;
  rec.pixel_count = segment.pixels.size();
  rec.image_pixels = image_pixels;

  // Margin enters as 1 - D so that every measure grows with uncertainty.
  auto value_fn = [&](std::size_t m) {
    return [&heatmaps, m](PixelIndex p) -> double {
      switch (m) {
        case 0:
          return heatmaps.one_minus_max[p];
        case 1:
          return heatmaps.entropy[p];
        case 2:
          return 1.0 - heatmaps.margin[p];
        default:
          return (*heatmaps.gradient_norm)[p];
      }
    };
  };

  Stats full[4];
  for (std::size_t m = 0; m < measures; ++m) {
    full[m] = region_stats(segment.pixels, value_fn(m));
    rec.features.push_back(full[m].mean);
  }
  if (spec.kind != FeatureSetKind::uncertainty_only) {
    rec.features.push_back(rec.relative_size());
    for (std::size_t k = 0; k < num_classes; ++k) rec.features.push_back(k == segment.cls ? 1.0 : 0.0);
  }
  if (spec.kind == FeatureSetKind::all) append_region_features(rec, segment, full, measures, value_fn);

  if (rec.features.size() != spec.columns.size()) {
    throw ContractViolation("feature count does not match the feature set layout");
  }
  return rec;
}

}  // namespace segqual
