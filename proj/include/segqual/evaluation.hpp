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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segqual/quality.hpp"

namespace segqual {

/// Mann-Whitney AUROC, ties count one half. EvaluationError when either
/// class is missing.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct PrPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  /// One point per distinct score, highest threshold first.
  std::vector<PrPoint> points;
  /// sum_k (R_k - R_{k-1}) P_k.
  double average_precision = 0.0;
};

/// Positives are label 1 (low-quality segments).
PrCurve precision_recall(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct Estimate {
  double value = 0.0;
  double std = 0.0;
};

struct ClassifierMetrics {
  Estimate auroc;
  Estimate average_precision;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Point estimates plus bootstrap standard deviations over `resamples`
/// resamples of the segments. Resample r uses derive_seed(seed, r).
ClassifierMetrics classifier_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                     std::size_t resamples = 1000, std::uint64_t seed = 0);

/// Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct QualityBin {
  double center = 0.0;
  double mean_p = 0.0;
  double mean_iou = 0.0;
  double mean_iou_adj = 0.0;
  std::size_t count = 0;
};

struct BinnedQuality {
  /// Non-empty bins only, by increasing center.
  std::vector<QualityBin> bins;
  std::optional<double> rho_p;
  std::optional<double> rho_iou;
  std::optional<double> rho_iou_adj;
};

BinnedQuality binned_quality(std::span<const double> scores, std::span<const SegmentQuality> qualities,
                             std::size_t bins = 10);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct CategoryStat {
  double mean_delta = 0.0;
  double std_delta = 0.0;
  std::size_t count = 0;
};

struct DeltaMiouReport {
  std::vector<double> deltas;
  double mean = 0.0;
  double std = 0.0;
  double fraction_negative = 0.0;
  double mean_before = 0.0;
  double mean_after = 0.0;
  /// 40 bins over [-1, 1].
  std::vector<std::size_t> histogram;
  MeanStd wrong_classes_before;
  MeanStd wrong_classes_after;
  MeanStd correct_classes_before;
  MeanStd correct_classes_after;
  /// Keyed "<category>=<value>".
  std::map<std::string, CategoryStat> categories;
};

inline constexpr std::size_t kDeltaHistogramBins = 40;

/// ValidationError on length mismatch. `categories` may be empty or aligned
/// with the image lists.
DeltaMiouReport delta_miou_report(std::span<const ImageQuality> before, std::span<const ImageQuality> after,
                                  std::span<const std::map<std::string, std::string>> categories = {});

struct EvalReport {
  std::optional<ClassifierMetrics> classifier;
  PrCurve pr_curve;
  BinnedQuality score_quality;
  DeltaMiouReport delta_miou;
  std::size_t segments = 0;
  std::size_t images = 0;
};

std::string eval_report_to_json(const EvalReport& report);

// CSV exports used for external plotting and the SVG renderer.
std::string pr_curve_csv(const PrCurve& curve);
std::string quality_bins_csv(const BinnedQuality& bins);
std::string delta_histogram_csv(const DeltaMiouReport& report);

}  // namespace segqual
