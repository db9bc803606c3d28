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
#include "segqual/geometry.hpp"

using namespace segqual;

namespace {

SegmentationMask from_rows(const std::vector<std::string>& rows) {
  SegmentationMask m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = static_cast<ClassId>(rows[r][c] - '0');
  }
  return m;
}

oracle::PixelSet as_set(const std::vector<PixelIndex>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("all-background mask has no segments") {
  const auto d = decompose(SegmentationMask(4, 4, ClassId{0}), 0);
  CHECK(d.segments.empty());
  for (const auto id : d.id_map.values()) CHECK(id == 0);
}

TEST_CASE("separated rectangles are distinct segments in raster order") {
  const auto m = from_rows({"0000000",
                            "0110000",
                            "0110022",
                            "0000022",
                            "1100000"});
  const auto d = decompose(m, 0);
  REQUIRE(d.segments.size() == 3);
  CHECK(d.segments[0].cls == 1);
  CHECK(d.segments[0].size() == 4);
  CHECK(d.segments[1].cls == 2);
  CHECK(d.segments[2].cls == 1);
  CHECK(d.segments[2].size() == 2);
  CHECK(d.id_map(4, 1) == 3);
}

TEST_CASE("diagonal contact does not connect") {
  const auto d = decompose(from_rows({"10", "01"}), 0);
  CHECK(d.segments.size() == 2);
}

TEST_CASE("decomposition matches the relaxation oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = oracle::random_mask(rng, 1 + rng.below(16), 1 + rng.below(16), 4);
    const auto d = decompose(m, 0);
    const auto expected = oracle::components(m, 0);
    REQUIRE(d.segments.size() == expected.size());
    std::size_t total = 0;
    for (std::size_t s = 0; s < expected.size(); ++s) {
      const auto& seg = d.segments[s];
      CHECK(seg.id == s + 1);
      CHECK(as_set(seg.pixels) == expected[s]);
      CHECK(seg.cls == m[*expected[s].begin()]);
      total += seg.size();
      for (const auto p : seg.pixels) CHECK(d.id_map[p] == seg.id);
    }
    std::size_t foreground = 0;
    for (const auto v : m.values()) foreground += v != 0;
    CHECK(total == foreground);
  }
}

TEST_CASE("boundary and inner split") {
  SUBCASE("single pixel") {
    const auto d = decompose(from_rows({"000", "010", "000"}), 0);
    CHECK(d.segments[0].boundary_pixels.size() == 1);
    CHECK(d.segments[0].inner_pixels.empty());
  }
  SUBCASE("5x5 square inside the image") {
    SegmentationMask m(7, 7, ClassId{0});
    for (std::size_t r = 1; r <= 5; ++r) {
      for (std::size_t c = 1; c <= 5; ++c) m(r, c) = 3;
    }
    const auto d = decompose(m, 0);
    const auto split = split_boundary_inner(d.segments[0], d.id_map);
    CHECK(split.inner.size() == 9);
    CHECK(split.boundary.size() == 16);
    CHECK(as_set(split.inner) == oracle::inner_pixels(as_set(d.segments[0].pixels), 7, 7));
  }
  SUBCASE("width two") {
    const auto d = decompose(from_rows({"0000", "0110", "0110", "0110", "0110", "0000"}), 0);
    CHECK(d.segments[0].inner_pixels.empty());
  }
  SUBCASE("image border pixels are never inner") {
    const auto d = decompose(SegmentationMask(4, 4, ClassId{1}), 0);
    CHECK(d.segments[0].inner_pixels.size() == 4);
  }
}

TEST_CASE("boundary/inner split matches the neighborhood oracle") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = 2 + rng.below(14), w = 2 + rng.below(14);
    const auto m = oracle::random_mask(rng, h, w, 3, 0.85);
    const auto d = decompose(m, 0);
    for (const auto& seg : d.segments) {
      const auto pixels = as_set(seg.pixels);
      const auto inner = oracle::inner_pixels(pixels, h, w);
      CHECK(as_set(seg.inner_pixels) == inner);
      auto boundary = as_set(seg.boundary_pixels);
      CHECK(boundary.size() + inner.size() == pixels.size());
      boundary.insert(inner.begin(), inner.end());
      CHECK(boundary == pixels);
      CHECK(seg.boundary_pixels.size() >= 1);
    }
  }
}

TEST_CASE("neighbor sets") {
  SUBCASE("enclosed pixel sees exactly its host") {
    const auto d = decompose(from_rows({"111", "121", "111"}), 0);
    REQUIRE(d.segments.size() == 2);
    CHECK(d.segments[1].neighbors == std::vector<SegmentId>{1});
    CHECK_FALSE(d.segments[1].touches_background());
  }
  SUBCASE("segment bordered only by image edge and background") {
    const auto d = decompose(from_rows({"110", "000"}), 0);
    CHECK(d.segments[0].neighbors == std::vector<SegmentId>{kBackgroundNeighbor});
    CHECK(d.segments[0].touches_background());
  }
  SUBCASE("full-image segment has none") {
    const auto d = decompose(SegmentationMask(3, 3, ClassId{2}), 0);
    CHECK(d.segments[0].neighbors.empty());
  }
}

TEST_CASE("neighbors match the dilation oracle and are symmetric") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = 1 + rng.below(16), w = 1 + rng.below(16);
    const auto m = oracle::random_mask(rng, h, w, 4);
    const auto d = decompose(m, 0);
    for (const auto& seg : d.segments) {
      std::set<SegmentId> expected;
      for (const auto p : oracle::dilation_ring(as_set(seg.pixels), h, w)) expected.insert(d.id_map[p]);
      CHECK(std::set<SegmentId>(seg.neighbors.begin(), seg.neighbors.end()) == expected);
      CHECK(std::is_sorted(seg.neighbors.begin(), seg.neighbors.end()));
      CHECK(neighbor_segments(seg, d.id_map) == seg.neighbors);
      for (const auto n : seg.neighbors) {
        CHECK(n != seg.id);
        if (n == kBackgroundNeighbor) continue;
        const auto& other = d.segment(n).neighbors;
        CHECK(std::find(other.begin(), other.end(), seg.id) != other.end());
      }
    }
  }
}

TEST_CASE("class permutation leaves segment pixel sets unchanged") {
  Rng rng(6);
  const std::vector<ClassId> perm = {0, 3, 1, 4, 2};
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = oracle::random_mask(rng, 12, 12, 5);
    SegmentationMask p = m;
    for (auto& v : p.values()) v = perm[v];
    const auto a = decompose(m, 0);
    const auto b = decompose(p, 0);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t s = 0; s < a.segments.size(); ++s) {
      CHECK(a.segments[s].pixels == b.segments[s].pixels);
      CHECK(perm[a.segments[s].cls] == b.segments[s].cls);
    }
  }
}
