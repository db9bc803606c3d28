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
#include "segqual/quality.hpp"

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

const Segment& segment_at(const SegmentDecomposition& d, std::size_t r, std::size_t c) {
  return d.segment(d.id_map(r, c));
}

}  // namespace

TEST_CASE("worked 4x4 example") {
  // Ground truth class 1 everywhere; prediction 1 on columns 0-1, 2 on column 2, 1 on column 3.
  const auto gt = SegmentationMask(4, 4, ClassId{1});
  const auto pred = from_rows({"1121", "1121", "1121", "1121"});
  const auto pd = decompose(pred, 0);
  const auto gd = decompose(gt, 0);
  const auto& left = segment_at(pd, 0, 0);
  const auto q = segment_quality(left, pred, gd);
  CHECK(q.iou == 0.5);
  CHECK(q.iou_adj == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(q.precision_p == 1.0);

  const auto matched = matched_gt_union(left, gd);
  CHECK(matched.size() == 16);
  CHECK(other_same_class_cover(left, matched, pred).size() == 4);

  const auto& middle = segment_at(pd, 0, 2);
  const auto qm = segment_quality(middle, pred, gd);
  CHECK(qm.precision_p == 0.0);
  CHECK(qm.iou == 0.0);
  CHECK(qm.iou_adj == 0.0);
}

TEST_CASE("matched union covers every intersecting same-class ground-truth segment") {
  const auto gt = from_rows({"1101", "1101", "0000"});
  const auto pred = from_rows({"0111", "0000", "2222"});
  const auto pd = decompose(pred, 0);
  const auto gd = decompose(gt, 0);
  const auto& seg = segment_at(pd, 0, 1);
  CHECK(matched_gt_union(seg, gd).size() == 6);
  const auto& bottom = segment_at(pd, 2, 0);
  CHECK(matched_gt_union(bottom, gd).empty());
  const auto q = segment_quality(bottom, pred, gd);
  CHECK(q.precision_p == 0.0);
}

TEST_CASE("reduction cases") {
  SUBCASE("identical sets") {
    const auto m = from_rows({"0110", "0110"});
    const auto d = decompose(m, 0);
    const auto q = segment_quality(d.segments[0], m, d);
    CHECK(q.iou == 1.0);
    CHECK(q.iou_adj == 1.0);
    CHECK(q.precision_p == 1.0);
  }
  SUBCASE("half the prediction inside the ground truth") {
    const auto gt = from_rows({"1100"});
    const auto pred = from_rows({"0111"});
    const auto pd = decompose(pred, 0);
    const auto q = segment_quality(pd.segments[0], pred, decompose(gt, 0));
    CHECK(q.precision_p == doctest::Approx(1.0 / 3.0));
    CHECK(q.iou == doctest::Approx(0.25));
    CHECK(q.iou_adj == q.iou);
  }
}

TEST_CASE("segment metrics match the set-algebra oracle with ordering") {
  Rng rng(99);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t h = 1 + rng.below(12), w = 1 + rng.below(12);
    const std::size_t classes = 2 + rng.below(5);
    const auto gt = oracle::random_mask(rng, h, w, classes);
    const auto pred = oracle::random_mask(rng, h, w, classes);
    const auto pd = decompose(pred, 0);
    const auto gd = decompose(gt, 0);
    const auto qs = segment_qualities(pd, pred, gd);
    REQUIRE(qs.size() == pd.segments.size());
    for (std::size_t s = 0; s < qs.size(); ++s) {
      const auto expected = oracle::segment_quality(as_set(pd.segments[s].pixels), pred, gt, 0);
      CHECK(qs[s].precision_p == expected.p);
      CHECK(qs[s].iou == expected.iou);
      CHECK(qs[s].iou_adj == expected.iou_adj);
      CHECK(qs[s].precision_p >= qs[s].iou_adj);
      CHECK(qs[s].iou_adj >= qs[s].iou);
      CHECK(qs[s].iou >= 0.0);
      CHECK(qs[s].precision_p <= 1.0);
      if (qs[s].precision_p == 0.0) CHECK(qs[s].iou_adj == 0.0);
    }
  }
}

TEST_CASE("image mIoU") {
  SUBCASE("perfect prediction") {
    Rng rng(1);
    const auto m = oracle::random_mask(rng, 8, 8, 4);
    CHECK(image_miou(m, m).miou == 1.0);
  }
  SUBCASE("all wrong") {
    const auto q = image_miou(SegmentationMask(4, 4, ClassId{1}), SegmentationMask(4, 4, ClassId{2}));
    CHECK(q.miou == 0.0);
    CHECK(q.num_wrong_classes == 1);
    CHECK(q.num_correct_classes == 0);
    CHECK(q.per_class.size() == 2);
    CHECK(q.per_class.at(1) == ClassTally{0, 16, 0});
    CHECK(q.per_class.at(2) == ClassTally{0, 0, 16});
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(image_miou(SegmentationMask(2, 2), SegmentationMask(2, 3)), ValidationError);
  }
}

TEST_CASE("image mIoU matches the confusion-matrix oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto gt = oracle::random_mask(rng, 16, 16, 5);
    const auto pred = oracle::random_mask(rng, 16, 16, 5);
    const auto q = image_miou(pred, gt);
    const auto expected = oracle::image_miou(pred, gt, 0);
    CHECK(q.miou == doctest::Approx(expected.miou).epsilon(1e-15));
    CHECK(q.num_wrong_classes == expected.wrong);
    CHECK(q.num_correct_classes == expected.correct);
  }
}

TEST_CASE("mIoU is invariant under a shared class permutation") {
  Rng rng(8);
  const std::vector<ClassId> perm = {3, 0, 4, 1, 2};
  for (int trial = 0; trial < 100; ++trial) {
    auto gt = oracle::random_mask(rng, 10, 10, 5);
    auto pred = oracle::random_mask(rng, 10, 10, 5);
    const double before = image_miou(pred, gt).miou;
    for (auto& v : gt.values()) v = perm[v];
    for (auto& v : pred.values()) v = perm[v];
    CHECK(image_miou(pred, gt, perm[0]).miou == doctest::Approx(before).epsilon(1e-15));
  }
}

TEST_CASE("removing a false segment over ground-truth background never lowers mIoU") {
  Rng rng(12);
  std::size_t checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto gt = oracle::random_mask(rng, 10, 10, 4);
    const auto pred = oracle::random_mask(rng, 10, 10, 6);
    const auto d = decompose(pred, 0);
    for (const auto& seg : d.segments) {
      auto local_gt = gt;
      for (const auto p : seg.pixels) local_gt[p] = 0;
      if (std::find(local_gt.values().begin(), local_gt.values().end(), seg.cls) != local_gt.values().end()) continue;
      const double before = image_miou(pred, local_gt).miou;
      auto removed = pred;
      for (const auto p : seg.pixels) removed[p] = 0;
      CHECK(image_miou(removed, local_gt).miou >= before);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("relabeling an absent class to background leaves other foreground tallies unchanged") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gt = oracle::random_mask(rng, 10, 10, 4);
    const auto pred = oracle::random_mask(rng, 10, 10, 6);
    const auto before = image_miou(pred, gt);
    for (const ClassId absent : {ClassId{4}, ClassId{5}}) {
      auto removed = pred;
      for (auto& v : removed.values()) v = v == absent ? 0 : v;
      const auto after = image_miou(removed, gt);
      for (const auto& [cls, tally] : after.per_class) {
        if (cls == 0 || cls == absent) continue;
        CHECK(tally == before.per_class.at(cls));
      }
      CHECK(after.num_wrong_classes <= before.num_wrong_classes);
    }
  }
}
