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

#include "segqual/geometry.hpp"

#include <algorithm>

namespace segqual {

BoundarySplit split_boundary_inner(const Segment& segment, const Grid<SegmentId>& id_map) {
  const std::size_t h = id_map.height();
  const std::size_t w = id_map.width();
  BoundarySplit split;
  for (const PixelIndex p : segment.pixels) {
    const std::size_t r = p / w;
    const std::size_t c = p % w;
    bool inner = r > 0 && c > 0 && r + 1 < h && c + 1 < w;
    for (int dr = -1; inner && dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (id_map(r + dr, c + dc) != segment.id) {
          inner = false;
          break;
        }
      }
    }
    (inner ? split.inner : split.boundary).push_back(p);
  }
  return split;
}

std::vector<SegmentId> neighbor_segments(const Segment& segment, const Grid<SegmentId>& id_map) {
  const std::size_t h = id_map.height();
  const std::size_t w = id_map.width();
  std::vector<SegmentId> found;
  auto visit = [&](std::size_t r, std::size_t c) {
    const SegmentId id = id_map(r, c);
    if (id != segment.id) found.push_back(id);
  };
  // Only boundary pixels can have 4-neighbors outside the segment.
  const auto& candidates = segment.boundary_pixels.empty() ? segment.pixels : segment.boundary_pixels;
  for (const PixelIndex p : candidates) {
    const std::size_t r = p / w;
    const std::size_t c = p % w;
    if (r > 0) visit(r - 1, c);
    if (r + 1 < h) visit(r + 1, c);
    if (c > 0) visit(r, c - 1);
    if (c + 1 < w) visit(r, c + 1);
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return found;
}

SegmentDecomposition decompose(const SegmentationMask& mask, ClassId background) {
  const std::size_t h = mask.height();
  const std::size_t w = mask.width();
  SegmentDecomposition out;
  out.id_map = Grid<SegmentId>(h, w, 0);

  std::vector<PixelIndex> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    const ClassId cls = mask[start];
    if (cls == background || out.id_map[start] != 0) continue;
    Segment seg;
    seg.id = static_cast<SegmentId>(out.segments.size() + 1);
    seg.cls = cls;
    out.id_map[start] = seg.id;
    stack.assign(1, static_cast<PixelIndex>(start));
    while (!stack.empty()) {
      const PixelIndex p = stack.back();
      stack.pop_back();
      seg.pixels.push_back(p);
      const std::size_t r = p / w;
      const std::size_t c = p % w;
      auto push = [&](std::size_t q) {
        if (mask[q] == cls && out.id_map[q] == 0) {
          out.id_map[q] = seg.id;
          stack.push_back(static_cast<PixelIndex>(q));
        }
      };
      if (r > 0) push(p - w);
      if (r + 1 < h) push(p + w);
      if (c > 0) push(p - 1);
      if (c + 1 < w) push(p + 1);
    }
    std::sort(seg.pixels.begin(), seg.pixels.end());
    out.segments.push_back(std::move(seg));
  }

  for (auto& seg : out.segments) {
    auto split = split_boundary_inner(seg, out.id_map);
    seg.boundary_pixels = std::move(split.boundary);
    seg.inner_pixels = std::move(split.inner);
    seg.neighbors = neighbor_segments(seg, out.id_map);
  }
  return out;
}

}  // namespace segqual
