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
#include "segqual/correction.hpp"
#include "segqual/quality.hpp"

#include <nlohmann/json.hpp>

using namespace segqual;

namespace {

SegmentationMask from_rows(const std::vector<std::string>& rows) {
  SegmentationMask m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = static_cast<ClassId>(rows[r][c] - '0');
  }
  return m;
}

std::map<SegmentId, double> random_scores(Rng& rng, const SegmentDecomposition& d) {
  std::map<SegmentId, double> s;
  for (const auto& seg : d.segments) s[seg.id] = rng.uniform();
  return s;
}

}  // namespace

TEST_CASE("enclosed segment takes its host class") {
  const auto m = from_rows({"11111", "11211", "11111"});
  const auto d = decompose(m, 0);
  const auto out = correct_mask(m, d, {{1, 0.1}, {2, 0.9}}, 0.5);
  CHECK(out.corrected_mask == SegmentationMask(3, 5, ClassId{1}));
  REQUIRE(out.actions.size() == 1);
  CHECK(out.actions[0] == ActionRecord{2, CorrectionAction::replaced_by_class, 2, 1, 0.9});
}

TEST_CASE("segment between two neighbors goes to background") {
  const auto m = from_rows({"1133", "1233", "1133"});
  const auto d = decompose(m, 0);
  REQUIRE(d.segment(3).cls == 2);
  const auto out = correct_mask(m, d, {{1, 0.0}, {2, 0.0}, {3, 0.8}}, 0.5);
  CHECK(out.corrected_mask(1, 1) == 0);
  REQUIRE(out.actions.size() == 1);
  CHECK(out.actions[0].action == CorrectionAction::removed_to_background);
}

TEST_CASE("one neighbor plus background adjacency is not enclosure") {
  const auto m = from_rows({"0111", "0121", "0111"});
  const auto d = decompose(m, 0);
  const auto out = correct_mask(m, d, {{1, 0.0}, {2, 0.8}}, 0.5);
  CHECK(out.corrected_mask(1, 2) == 1);
  const auto m2 = from_rows({"0211", "0111", "0111"});
  const auto d2 = decompose(m2, 0);
  REQUIRE(d2.segment(2).cls == 1);
  const auto out2 = correct_mask(m2, d2, {{1, 0.0}, {2, 0.9}}, 0.5);
  CHECK(out2.corrected_mask(0, 1) == 2);
  CHECK(out2.corrected_mask(0, 2) == 0);
}

TEST_CASE("neighbors are frozen on the original mask") {
  // The host is also removed; the enclosed segment still takes the host's original class.
  const auto m = from_rows({"00000", "01110", "01210", "01110", "00000"});
  const auto d = decompose(m, 0);
  const auto out = correct_mask(m, d, {{1, 0.9}, {2, 0.9}}, 0.5);
  CHECK(out.corrected_mask(2, 2) == 1);
  CHECK(out.corrected_mask(1, 1) == 0);
}

TEST_CASE("scores at or below tau are untouched") {
  const auto m = from_rows({"11111", "11211", "11111"});
  const auto d = decompose(m, 0);
  CHECK(correct_mask(m, d, {{1, 0.5}, {2, 0.5}}, 0.5).corrected_mask == m);
  CHECK(correct_mask(m, d, {{1, 1.0}, {2, 1.0}}, 1.0).actions.empty());
  CHECK_THROWS_AS(correct_mask(m, d, {{1, 0.5}}, 0.5), ContractViolation);
}

TEST_CASE("order independence, untouched-pixel equality and action consistency on random masks") {
  Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = oracle::random_mask(rng, 4 + rng.below(14), 4 + rng.below(14), 4);
    const auto d = decompose(m, 0);
    const auto scores = random_scores(rng, d);
    const double tau = rng.uniform();
    const auto asc = correct_mask(m, d, scores, tau, 0, SegmentOrder::ascending);
    const auto desc = correct_mask(m, d, scores, tau, 0, SegmentOrder::descending);
    CHECK(asc.corrected_mask == desc.corrected_mask);
    CHECK(asc.actions == desc.actions);
    std::set<SegmentId> acted;
    for (const auto& a : asc.actions) {
      CHECK(scores.at(a.segment_id) > tau);
      acted.insert(a.segment_id);
      const auto& seg = d.segment(a.segment_id);
      if (a.action == CorrectionAction::replaced_by_class) {
        REQUIRE(seg.neighbors.size() == 1);
        CHECK(seg.neighbors[0] != kBackgroundNeighbor);
        CHECK(a.new_class == d.segment(seg.neighbors[0]).cls);
      } else {
        CHECK(a.new_class == 0);
      }
      for (const auto p : seg.pixels) CHECK(asc.corrected_mask[p] == a.new_class);
    }
    for (const auto& seg : d.segments) {
      if (scores.at(seg.id) > tau) {
        CHECK(acted.count(seg.id) == 1);
        continue;
      }
      for (const auto p : seg.pixels) CHECK(asc.corrected_mask[p] == m[p]);
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) CHECK(asc.corrected_mask[i] == 0);
    }
  }
}

TEST_CASE("actions log is valid JSON") {
  const std::vector<ActionRecord> actions = {{3, CorrectionAction::replaced_by_class, 2, 1, 0.75},
                                             {5, CorrectionAction::removed_to_background, 4, 0, 0.9}};
  const auto j = nlohmann::json::parse(actions_to_json("img_0001", 0.5, actions));
  CHECK(j.at("image_id") == "img_0001");
  CHECK(j.at("tau") == 0.5);
  REQUIRE(j.at("actions").size() == 2);
  CHECK(j["actions"][0]["segment_id"] == 3);
  CHECK(j["actions"][0]["action"] == "replaced_by_class");
  CHECK(j["actions"][1]["action"] == "removed_to_background");
}

TEST_CASE("threshold sweep") {
  // Each image: ground truth class 1 everywhere, with one small false class-2 patch predicted inside.
  std::vector<SweepImage> images;
  Rng rng(31);
  for (int i = 0; i < 6; ++i) {
    SweepImage im;
    im.ground_truth = SegmentationMask(8, 8, ClassId{1});
    im.prediction = im.ground_truth;
    const std::size_t r = 1 + rng.below(5), c = 1 + rng.below(5);
    im.prediction(r, c) = 2;
    im.prediction(r, c + 1) = 2;
    im.decomposition = decompose(im.prediction, 0);
    for (const auto& seg : im.decomposition.segments) im.scores[seg.id] = seg.cls == 2 ? 0.8 + 0.02 * i : 0.1 + 0.02 * i;
    images.push_back(std::move(im));
  }
  const std::vector<double> taus = {1.0, 0.0, 0.5, 0.95};
  const auto rows = sweep_threshold(images, taus);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].tau == 0.0);
  CHECK(rows[3].tau == 1.0);
  CHECK(rows[3].mean_delta_miou == 0.0);
  CHECK(rows[3].fraction_degraded == 0.0);
  CHECK(rows[2].mean_delta_miou == 0.0);
  CHECK(rows[1].mean_delta_miou > 0.0);
  CHECK(rows[1].mean_delta_miou == doctest::Approx(1.0 - 0.5 * 62.0 / 64.0));
  CHECK(rows[0].mean_delta_miou < rows[1].mean_delta_miou);
  const double best = best_tau(rows);
  CHECK(best == 0.5);

  const auto fine = sweep_threshold(images, default_tau_grid());
  const double chosen = best_tau(fine);
  CHECK(chosen >= 0.2);
  CHECK(chosen < 0.8);
  const auto grid = default_tau_grid();
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("all-wrong predictions improve at tau zero") {
  std::vector<SweepImage> images;
  Rng rng(32);
  for (int i = 0; i < 5; ++i) {
    SweepImage im;
    im.ground_truth = SegmentationMask(6, 6, ClassId{0});
    im.prediction = oracle::random_mask(rng, 6, 6, 4, 0.8);
    for (auto& v : im.prediction.values()) v = v == 0 ? 3 : v;
    im.decomposition = decompose(im.prediction, 0);
    for (const auto& seg : im.decomposition.segments) im.scores[seg.id] = 0.5;
    images.push_back(std::move(im));
  }
  const std::vector<double> taus = {0.0};
  CHECK(sweep_threshold(images, taus)[0].mean_delta_miou > 0.0);
}
