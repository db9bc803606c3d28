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
#include <span>
#include <vector>

#include "segqual/geometry.hpp"
#include "segqual/types.hpp"

namespace segqual {

struct SegmentQuality {
  double precision_p = 0.0;
  double iou = 0.0;
  double iou_adj = 0.0;
};

/// Union K of ground truth segments of the predicted class that share at
/// least one pixel with `pred`. Sorted pixel indices.
std::vector<PixelIndex> matched_gt_union(const Segment& pred, const SegmentDecomposition& gt);

/// Pixels of K covered by other predicted segments of pred's class.
std::vector<PixelIndex> other_same_class_cover(const Segment& pred,
                                               std::span<const PixelIndex> matched,
                                               const SegmentationMask& pred_mask);

double segment_iou(const Segment& pred, std::span<const PixelIndex> matched);
double segment_iou_adj(const Segment& pred, std::span<const PixelIndex> matched,
                       std::span<const PixelIndex> other_cover);
double segment_precision(const Segment& pred, std::span<const PixelIndex> matched);

SegmentQuality segment_quality(const Segment& pred, const SegmentationMask& pred_mask,
                               const SegmentDecomposition& gt);

/// Quality of every segment of `pred`, indexed by segment id - 1.
std::vector<SegmentQuality> segment_qualities(const SegmentDecomposition& pred,
                                              const SegmentationMask& pred_mask,
                                              const SegmentDecomposition& gt);

struct ClassTally {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  friend bool operator==(const ClassTally&, const ClassTally&) = default;
};

struct ImageQuality {
  double miou = 0.0;
  /// Classes present in prediction or ground truth only.
  std::map<ClassId, ClassTally> per_class;
  /// Non-background classes predicted but absent from the ground truth.
  std::size_t num_wrong_classes = 0;
  /// Non-background classes present in both.
  std::size_t num_correct_classes = 0;
};

/// Mean IoU over the classes of prediction union ground truth. Background
/// counts as an ordinary class for the mean but is left out of the class
/// counts.
ImageQuality image_miou(const SegmentationMask& pred, const SegmentationMask& gt,
                        ClassId background = kDefaultBackground);

}  // namespace segqual
