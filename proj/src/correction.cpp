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

#include "segqual/correction.hpp"

#include <algorithm>

#include "json.hpp"
#include "segqual/errors.hpp"

namespace segqual {

std::string_view to_string(CorrectionAction action) {
  return action == CorrectionAction::replaced_by_class ? "replaced_by_class" : "removed_to_background";
}

CorrectionOutcome correct_mask(const SegmentationMask& mask, const SegmentDecomposition& decomp,
                               const std::map<SegmentId, double>& scores, double tau, ClassId background,
                               SegmentOrder order) {
  if (decomp.height() != mask.height() || decomp.width() != mask.width()) {
    throw ContractViolation("decomposition does not match the mask dimensions");
  }
  CorrectionOutcome out{mask, {}};
  const std::size_t n = decomp.segments.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Segment& seg = decomp.segments[order == SegmentOrder::ascending ? k : n - 1 - k];
    const auto it = scores.find(seg.id);
    if (it == scores.end()) throw ContractViolation("segment " + std::to_string(seg.id) + " has no score");
    if (!(it->second > tau)) continue;
    ActionRecord a;
    a.segment_id = seg.id;
    a.old_class = seg.cls;
    a.score = it->second;
    if (seg.neighbors.size() == 1 && seg.neighbors.front() != kBackgroundNeighbor) {
      a.action = CorrectionAction::replaced_by_class;
      a.new_class = decomp.segment(seg.neighbors.front()).cls;
    } else {
      a.action = CorrectionAction::removed_to_background;
      a.new_class = background;
    }
    for (const PixelIndex p : seg.pixels) out.corrected_mask[p] = a.new_class;
    out.actions.push_back(a);
  }
  std::sort(out.actions.begin(), out.actions.end(),
            [](const ActionRecord& x, const ActionRecord& y) { return x.segment_id < y.segment_id; });
  return out;
}

std::string actions_to_json(const std::string& image_id, double tau, std::span<const ActionRecord> actions) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["image_id"] = image_id;
  j["tau"] = tau;
  ordered_json list = ordered_json::array();
  for (const auto& a : actions) {
    ordered_json e;
    e["segment_id"] = a.segment_id;
    e["action"] = std::string(to_string(a.action));
    e["old_class"] = a.old_class;
    e["new_class"] = a.new_class;
    e["score"] = a.score;
    list.push_back(std::move(e));
  }
  j["actions"] = std::move(list);
  return j.dump(1) + "\n";
}

std::vector<double> default_tau_grid() {
  std::vector<double> taus;
  for (int i = 0; i <= 20; ++i) taus.push_back(static_cast<double>(i) / 20.0);
  return taus;
}

std::vector<SweepRow> sweep_threshold(std::span<const SweepImage> images, std::span<const double> taus,
                                      ClassId background) {
  std::vector<double> sorted(taus.begin(), taus.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> before;
  before.reserve(images.size());
  for (const auto& im : images) before.push_back(image_miou(im.prediction, im.ground_truth, background).miou);

  std::vector<SweepRow> rows;
  for (const double tau : sorted) {
    SweepRow row;
    row.tau = tau;
    std::size_t degraded = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto& im = images[i];
      const auto outcome = correct_mask(im.prediction, im.decomposition, im.scores, tau, background);
      const double delta =
          outcome.actions.empty() ? 0.0 : image_miou(outcome.corrected_mask, im.ground_truth, background).miou - before[i];
      sum += delta;
      if (delta < 0.0) ++degraded;
    }
    if (!images.empty()) {
      row.mean_delta_miou = sum / static_cast<double>(images.size());
      row.fraction_degraded = static_cast<double>(degraded) / static_cast<double>(images.size());
    }
    rows.push_back(row);
  }
  return rows;
}

double best_tau(std::span<const SweepRow> rows) {
  if (rows.empty()) return kDefaultTau;
  std::size_t first = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].mean_delta_miou > rows[first].mean_delta_miou) first = i;
  }
  std::size_t last = first;
  while (last + 1 < rows.size() && rows[last + 1].mean_delta_miou == rows[first].mean_delta_miou) ++last;
  return rows[first + (last - first) / 2].tau;
}

}  // namespace segqual
