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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segqual/geometry.hpp"
#include "segqual/quality.hpp"

namespace segqual {

inline constexpr double kDefaultTau = 0.5;

enum class CorrectionAction { removed_to_background, replaced_by_class };

std::string_view to_string(CorrectionAction action);

struct ActionRecord {
  SegmentId segment_id = 0;
  CorrectionAction action = CorrectionAction::removed_to_background;
  ClassId old_class = 0;
  ClassId new_class = 0;
  double score = 0.0;

  friend bool operator==(const ActionRecord&, const ActionRecord&) = default;
};

struct CorrectionOutcome {
  SegmentationMask corrected_mask;
  std::vector<ActionRecord> actions;
};

enum class SegmentOrder { ascending, descending };

/// Segments scoring above tau are relabelled: to the class of their single
/// neighbor segment when they are fully enclosed by it, to background
/// otherwise. Neighbor sets come from the original mask, so the outcome does
/// not depend on `order`; actions are always reported by ascending id.
/// Throws ContractViolation when a segment has no score.
CorrectionOutcome correct_mask(const SegmentationMask& mask, const SegmentDecomposition& decomp,
                               const std::map<SegmentId, double>& scores, double tau,
                               ClassId background = kDefaultBackground,
                               SegmentOrder order = SegmentOrder::ascending);

std::string actions_to_json(const std::string& image_id, double tau,
                            std::span<const ActionRecord> actions);

struct SweepImage {
  SegmentationMask prediction;
  SegmentDecomposition decomposition;
  std::map<SegmentId, double> scores;
  SegmentationMask ground_truth;
};

struct SweepRow {
  double tau = 0.0;
  double mean_delta_miou = 0.0;
  double fraction_degraded = 0.0;
};

/// 0.00, 0.05, ..., 1.00.
std::vector<double> default_tau_grid();

/// Mean mIoU change per tau, sorted by tau.
std::vector<SweepRow> sweep_threshold(std::span<const SweepImage> images, std::span<const double> taus,
                                      ClassId background = kDefaultBackground);

/// Middle entry of the run of taus attaining the best mean delta.
double best_tau(std::span<const SweepRow> rows);

}  // namespace segqual
