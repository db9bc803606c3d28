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

#include "doctest.h"
#include "oracles.hpp"
#include "segqual/features.hpp"

#include <cmath>

using namespace segqual;

namespace {

UncertaintyHeatmaps random_heatmaps(Rng& rng, std::size_t h, std::size_t w, bool gradient) {
  UncertaintyHeatmaps maps{Grid<double>(h, w), Grid<double>(h, w), Grid<double>(h, w), std::nullopt};
  for (std::size_t i = 0; i < h * w; ++i) {
    maps.one_minus_max[i] = rng.uniform();
    maps.entropy[i] = rng.uniform();
    maps.margin[i] = rng.uniform();
  }
  if (gradient) {
    maps.gradient_norm = Grid<double>(h, w);
    for (std::size_t i = 0; i < h * w; ++i) (*maps.gradient_norm)[i] = 3.0 * rng.uniform();
  }
  return maps;
}

double measure(const UncertaintyHeatmaps& maps, std::size_t m, PixelIndex p) {
  switch (m) {
    case 0:
      return maps.one_minus_max[p];
    case 1:
      return maps.entropy[p];
    case 2:
      return 1.0 - maps.margin[p];
    default:
      return (*maps.gradient_norm)[p];
  }
}

// Flat-loop mean and population standard deviation.
std::pair<double, double> naive_stats(const UncertaintyHeatmaps& maps, std::size_t m,
                                      const std::vector<PixelIndex>& pixels) {
  double s = 0.0, s2 = 0.0;
  for (const auto p : pixels) s += measure(maps, m, p);
  const double mean = s / static_cast<double>(pixels.size());
  for (const auto p : pixels) s2 += (measure(maps, m, p) - mean) * (measure(maps, m, p) - mean);
  return {mean, std::sqrt(s2 / static_cast<double>(pixels.size()))};
}

double col(const SegmentRecord& r, const FeatureSetSpec& spec, const std::string& name) {
  const auto it = std::find(spec.columns.begin(), spec.columns.end(), name);
  REQUIRE(it != spec.columns.end());
  return r.features[static_cast<std::size_t>(it - spec.columns.begin())];
}

}  // namespace

TEST_CASE("feature set layouts nest") {
  for (const bool gradient : {false, true}) {
    const auto u = make_feature_set(FeatureSetKind::uncertainty_only, 5, gradient);
    const auto r = make_feature_set(FeatureSetKind::reduced, 5, gradient);
    const auto a = make_feature_set(FeatureSetKind::all, 5, gradient);
    const std::size_t m = gradient ? 4 : 3;
    CHECK(u.columns.size() == m);
    CHECK(r.columns.size() == m + 1 + 5);
    CHECK(a.columns.size() == m + 1 + 5 + m + 4 * m + 1);
    CHECK(std::equal(u.columns.begin(), u.columns.end(), r.columns.begin()));
    CHECK(std::equal(r.columns.begin(), r.columns.end(), a.columns.begin()));
    std::set<std::string> unique(a.columns.begin(), a.columns.end());
    CHECK(unique.size() == a.columns.size());
  }
  CHECK(make_feature_set(FeatureSetKind::all, 3, true).columns.size() -
            make_feature_set(FeatureSetKind::all, 3, false).columns.size() ==
        6);
  CHECK(parse_feature_set("reduced") == FeatureSetKind::reduced);
  CHECK(to_string(FeatureSetKind::uncertainty_only) == "uncertainty_only");
  CHECK_THROWS_AS(parse_feature_set("most"), ConfigError);
}

TEST_CASE("constant heatmap gives zero spread everywhere") {
  UncertaintyHeatmaps maps{Grid<double>(6, 6, 0.3), Grid<double>(6, 6, 0.4), Grid<double>(6, 6, 0.9),
                           Grid<double>(6, 6, 2.0)};
  SegmentationMask m(6, 6, ClassId{2});
  const auto d = decompose(m, 0);
  const auto spec = make_feature_set(FeatureSetKind::all, 3, true);
  const auto rec = aggregate_segment_features(maps, d.segments[0], 36, spec, 3);
  CHECK(col(rec, spec, "mean_one_minus_max") == doctest::Approx(0.3));
  CHECK(col(rec, spec, "mean_one_minus_margin") == doctest::Approx(0.1));
  CHECK(col(rec, spec, "mean_gradient_norm_inner") == doctest::Approx(2.0));
  for (std::size_t i = 0; i < spec.columns.size(); ++i) {
    if (spec.columns[i].rfind("std_", 0) == 0) CHECK(rec.features[i] == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(col(rec, spec, "relative_size") == 1.0);
  CHECK(col(rec, spec, "class_2") == 1.0);
  CHECK(col(rec, spec, "class_0") == 0.0);
  CHECK(col(rec, spec, "inner_empty") == 0.0);
  CHECK(rec.segment_id == 1);
  CHECK(rec.pixel_count == 36);
}

TEST_CASE("two-pixel segment with values 0 and 1") {
  UncertaintyHeatmaps maps{Grid<double>(1, 3, std::vector<double>{0.0, 1.0, 0.5}), Grid<double>(1, 3),
                           Grid<double>(1, 3), std::nullopt};
  SegmentationMask m(1, 3, std::vector<ClassId>{1, 1, 0});
  const auto d = decompose(m, 0);
  const auto spec = make_feature_set(FeatureSetKind::all, 2, false);
  const auto rec = aggregate_segment_features(maps, d.segments[0], 3, spec, 2);
  CHECK(col(rec, spec, "mean_one_minus_max") == 0.5);
  CHECK(col(rec, spec, "std_one_minus_max") == 0.5);
  CHECK(col(rec, spec, "inner_empty") == 1.0);
  CHECK(col(rec, spec, "mean_one_minus_max_inner") == 0.5);
  CHECK(col(rec, spec, "std_one_minus_max_inner") == 0.5);
  CHECK(col(rec, spec, "relative_size") == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("statistics match the flat-loop oracle and the weighted identity") {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t h = 4 + rng.below(20), w = 4 + rng.below(20);
    const bool gradient = trial % 2 == 0;
    const auto maps = random_heatmaps(rng, h, w, gradient);
    const auto mask = oracle::random_mask(rng, h, w, 3, 0.9);
    const auto d = decompose(mask, 0);
    const auto spec = make_feature_set(FeatureSetKind::all, 3, gradient);
    const std::size_t measures = gradient ? 4 : 3;
    const char* names[] = {"one_minus_max", "entropy", "one_minus_margin", "gradient_norm"};
    for (const auto& seg : d.segments) {
      const auto rec = aggregate_segment_features(maps, seg, h * w, spec, 3);
      REQUIRE(rec.features.size() == spec.columns.size());
      for (std::size_t m = 0; m < measures; ++m) {
        const std::string n = names[m];
        const auto full = naive_stats(maps, m, seg.pixels);
        const auto bnd = naive_stats(maps, m, seg.boundary_pixels);
        CHECK(std::abs(col(rec, spec, "mean_" + n) - full.first) <= 1e-12);
        CHECK(std::abs(col(rec, spec, "std_" + n) - full.second) <= 1e-12);
        CHECK(std::abs(col(rec, spec, "mean_" + n + "_boundary") - bnd.first) <= 1e-12);
        CHECK(std::abs(col(rec, spec, "std_" + n + "_boundary") - bnd.second) <= 1e-12);
        if (seg.inner_pixels.empty()) {
          CHECK(col(rec, spec, "mean_" + n + "_inner") == col(rec, spec, "mean_" + n));
          continue;
        }
        const auto inn = naive_stats(maps, m, seg.inner_pixels);
        CHECK(std::abs(col(rec, spec, "mean_" + n + "_inner") - inn.first) <= 1e-12);
        CHECK(std::abs(col(rec, spec, "std_" + n + "_inner") - inn.second) <= 1e-12);
        const double weighted = static_cast<double>(seg.boundary_pixels.size()) * bnd.first +
                                static_cast<double>(seg.inner_pixels.size()) * inn.first;
        CHECK(std::abs(static_cast<double>(seg.pixels.size()) * full.first - weighted) <= 1e-9);
      }
      CHECK(aggregate_segment_features(maps, seg, h * w, spec, 3) == rec);
    }
  }
}

TEST_CASE("missing gradient heatmap is rejected for gradient layouts") {
  Rng rng(3);
  const auto maps = random_heatmaps(rng, 4, 4, false);
  const auto d = decompose(SegmentationMask(4, 4, ClassId{1}), 0);
  CHECK_THROWS_AS(aggregate_segment_features(maps, d.segments[0], 16, make_feature_set(FeatureSetKind::reduced, 2, true), 2),
                  ValidationError);
  Segment empty;
  CHECK_THROWS_AS(aggregate_segment_features(maps, empty, 16, make_feature_set(FeatureSetKind::reduced, 2, false), 2),
                  ContractViolation);
}
