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

#include <span>
#include <vector>

#include "segqual/types.hpp"

namespace segqual {

/// Neighbor marker standing for background pixels.
inline constexpr SegmentId kBackgroundNeighbor = 0;

/// A 4-connected component of one class. Pixel lists hold linear indices
/// (row * width + col) in ascending order.
struct Segment {
  SegmentId id = 0;
  ClassId cls = 0;
  std::vector<PixelIndex> pixels;
  std::vector<PixelIndex> inner_pixels;
  std::vector<PixelIndex> boundary_pixels;
  /// Sorted; kBackgroundNeighbor first when background is adjacent.
  std::vector<SegmentId> neighbors;

  std::size_t size() const noexcept { return pixels.size(); }
  bool touches_background() const {
    return !neighbors.empty() && neighbors.front() == kBackgroundNeighbor;
  }
};

struct SegmentDecomposition {
  std::vector<Segment> segments;
  /// Segment id per pixel, 0 on background.
  Grid<SegmentId> id_map;

  const Segment& segment(SegmentId id) const { return segments.at(id - 1); }
  std::size_t height() const noexcept { return id_map.height(); }
  std::size_t width() const noexcept { return id_map.width(); }
};

/// 4-connected labelling per class with background excluded. Ids start at 1
/// and follow the raster order of each segment's first pixel. Boundary/inner
/// splits and neighbor sets are filled in.
SegmentDecomposition decompose(const SegmentationMask& mask, ClassId background);

struct BoundarySplit {
  std::vector<PixelIndex> boundary;
  std::vector<PixelIndex> inner;
};

/// Inner pixels have their whole 8-neighborhood inside the segment; pixels on
/// the image border are never inner.
BoundarySplit split_boundary_inner(const Segment& segment, const Grid<SegmentId>& id_map);

/// Ids owning pixels 4-adjacent to the segment (one cross-shaped dilation step
/// minus the segment), kBackgroundNeighbor for background.
std::vector<SegmentId> neighbor_segments(const Segment& segment, const Grid<SegmentId>& id_map);

}  // namespace segqual
