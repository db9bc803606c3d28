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

#include "segqual/quality.hpp"

#include <algorithm>
#include <iterator>
#include <set>

namespace segqual {

namespace {

std::size_t intersection_size(std::span<const PixelIndex> a, std::span<const PixelIndex> b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<PixelIndex> matched_gt_union(const Segment& pred, const SegmentDecomposition& gt) {
  std::set<SegmentId> matched;
  for (const PixelIndex p : pred.pixels) {
    const SegmentId id = gt.id_map[p];
    if (id != 0 && gt.segment(id).cls == pred.cls) matched.insert(id);
  }
  std::vector<PixelIndex> out;
  for (const SegmentId id : matched) {
    const auto& px = gt.segment(id).pixels;
    out.insert(out.end(), px.begin(), px.end());
  }
  // GT segments are disjoint, so sorting the concatenation gives the union.
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PixelIndex> other_same_class_cover(const Segment& pred, std::span<const PixelIndex> matched,
                                               const SegmentationMask& pred_mask) {
  std::vector<PixelIndex> out;
  auto own = pred.pixels.begin();
  for (const PixelIndex p : matched) {
    while (own != pred.pixels.end() && *own < p) ++own;
    const bool in_pred = own != pred.pixels.end() && *own == p;
    if (!in_pred && pred_mask[p] == pred.cls) out.push_back(p);
  }
  return out;
}

double segment_iou(const Segment& pred, std::span<const PixelIndex> matched) {
  const std::size_t inter = intersection_size(pred.pixels, matched);
  return ratio(inter, pred.pixels.size() + matched.size() - inter);
}

double segment_iou_adj(const Segment& pred, std::span<const PixelIndex> matched,
                       std::span<const PixelIndex> other_cover) {
  const std::size_t inter = intersection_size(pred.pixels, matched);
  // |pred ∪ (K \ cover)| where cover ⊂ K and cover ∩ pred = ∅.
  const std::size_t reduced = matched.size() - intersection_size(matched, other_cover);
  return ratio(inter, pred.pixels.size() + reduced - inter);
}

double segment_precision(const Segment& pred, std::span<const PixelIndex> matched) {
  return ratio(intersection_size(pred.pixels, matched), pred.pixels.size());
}

SegmentQuality segment_quality(const Segment& pred, const SegmentationMask& pred_mask,
                               const SegmentDecomposition& gt) {
  const auto matched = matched_gt_union(pred, gt);
  if (matched.empty()) return {};
  const auto cover = other_same_class_cover(pred, matched, pred_mask);
  return {segment_precision(pred, matched), segment_iou(pred, matched), segment_iou_adj(pred, matched, cover)};
}

std::vector<SegmentQuality> segment_qualities(const SegmentDecomposition& pred, const SegmentationMask& pred_mask,
                                              const SegmentDecomposition& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw ValidationError("prediction and ground truth dimensions differ");
  }
  std::vector<SegmentQuality> out;
  out.reserve(pred.segments.size());
  for (const auto& seg : pred.segments) out.push_back(segment_quality(seg, pred_mask, gt));
  return out;
}

ImageQuality image_miou(const SegmentationMask& pred, const SegmentationMask& gt, ClassId background) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    throw ValidationError("mIoU: prediction is " + std::to_string(pred.height()) + "x" +
                          std::to_string(pred.width()) + ", ground truth is " + std::to_string(gt.height()) +
                          "x" + std::to_string(gt.width()));
  }
  ImageQuality q;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const ClassId a = pred[i];
    const ClassId b = gt[i];
    if (a == b) {
      ++q.per_class[a].tp;
    } else {
      ++q.per_class[a].fp;
      ++q.per_class[b].fn;
    }
  }
  double sum = 0.0;
  for (const auto& [cls, t] : q.per_class) {
    sum += static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fp + t.fn);
    if (cls == background) continue;
    const bool in_pred = t.tp + t.fp > 0;
    const bool in_gt = t.tp + t.fn > 0;
    if (in_pred && in_gt) ++q.num_correct_classes;
    if (in_pred && !in_gt) ++q.num_wrong_classes;
  }
  q.miou = q.per_class.empty() ? 1.0 : sum / static_cast<double>(q.per_class.size());
  return q;
}

}  // namespace segqual
