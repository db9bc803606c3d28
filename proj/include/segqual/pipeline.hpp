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
#include <optional>
#include <string>
#include <vector>

#include "segqual/correction.hpp"
#include "segqual/evaluation.hpp"
#include "segqual/features.hpp"
#include "segqual/geometry.hpp"
#include "segqual/manifest.hpp"
#include "segqual/model.hpp"
#include "segqual/quality.hpp"
#include "segqual/records.hpp"
#include "segqual/uncertainty.hpp"

namespace segqual {

/// Everything derived from one manifest entry.
struct ImageAnalysis {
  std::string image_id;
  SegmentationMask prediction;
  std::optional<SegmentationMask> ground_truth;
  SegmentDecomposition decomposition;
  std::vector<SegmentRecord> records;
};

/// Feature set of a manifest: gradient columns only when every entry has a
/// feature tensor.
FeatureSetSpec feature_set_for(const DatasetManifest& manifest, FeatureSetKind kind);

/// Reads one entry, decomposes its prediction (argmax of the probabilities
/// when no mask is given) and aggregates features. Quality fields are filled
/// when ground truth is available.
ImageAnalysis analyze_image(const DatasetManifest& manifest, const ManifestEntry& entry,
                            const FeatureSetSpec& spec, double tau_p = kDefaultPrecisionThreshold);

/// One row per predicted segment, manifest order.
FeatureTable extract_features(const DatasetManifest& manifest, FeatureSetKind kind,
                              std::size_t threads = 1, double tau_p = kDefaultPrecisionThreshold);

struct CorrectionRun {
  FeatureTable scored;
  std::vector<CorrectionOutcome> outcomes;
  DatasetManifest corrected_manifest;
};

/// Per image writes <id>_uncertainty.npy (segment score per pixel, 0 on
/// background), <id>_corrected.npy, <id>_corrected.png and
/// <id>_actions.json; plus scored_table.csv and corrected_manifest.json.
CorrectionRun score_and_correct(const DatasetManifest& manifest, const MetaModel& model, double tau,
                                const std::filesystem::path& out_dir, std::size_t threads = 1);

/// Per-segment scores keyed by id for one image of a scored table.
std::map<SegmentId, double> scores_for_image(const FeatureTable& table, const std::string& image_id);

struct EvaluationInputs {
  DatasetManifest manifest;
  /// Directory containing <id>_corrected.npy files.
  std::filesystem::path corrected_dir;
  FeatureTable scored;
  std::uint64_t seed = 0;
  std::size_t bootstrap_resamples = 1000;
};

/// Writes report.json, pr_curve.csv, quality_bins.csv,
/// delta_miou_histogram.csv and the three SVG plots into out_dir.
EvalReport evaluate(const EvaluationInputs& inputs, const std::filesystem::path& out_dir,
                    std::size_t threads = 1);

/// Renders pr_curve.svg, score_quality.svg and delta_miou_histogram.svg from
/// the CSVs in `csv_dir`.
void render_plots(const std::filesystem::path& csv_dir, const std::filesystem::path& out_dir);

}  // namespace segqual
