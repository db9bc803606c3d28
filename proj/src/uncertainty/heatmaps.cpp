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

#include "segqual/uncertainty.hpp"

namespace segqual {

namespace {

struct SoftmaxGrids {
  Grid<double> one_minus_max;
  Grid<double> entropy;
  Grid<double> margin;
};

SoftmaxGrids softmax_grids(const ProbabilityMap& probs) {
  SoftmaxGrids g{Grid<double>(probs.height(), probs.width()), Grid<double>(probs.height(), probs.width()),
                 Grid<double>(probs.height(), probs.width())};
  simd::softmax_measures(simd::active_level(), probs.values(), probs.num_classes(), g.one_minus_max.values(),
                         g.entropy.values(), g.margin.values());
  return g;
}

}  // namespace

Grid<double> one_minus_max_prob(const ProbabilityMap& probs) { return softmax_grids(probs).one_minus_max; }

Grid<double> normalized_entropy(const ProbabilityMap& probs) { return softmax_grids(probs).entropy; }

Grid<double> top2_margin(const ProbabilityMap& probs) { return softmax_grids(probs).margin; }

Grid<double> gradient_norm(const ProbabilityMap& probs, const FeatureTensor& features) {
  if (features.height() != probs.height() || features.width() != probs.width()) {
    throw ValidationError("feature tensor is " + std::to_string(features.height()) + "x" +
                          std::to_string(features.width()) + ", probability map is " +
                          std::to_string(probs.height()) + "x" + std::to_string(probs.width()));
  }
  Grid<double> out(probs.height(), probs.width());
  simd::gradient_norms(simd::active_level(), probs.values(), probs.num_classes(), features.values(),
                       features.channels(), out.values());
  return out;
}

UncertaintyHeatmaps compute_heatmaps(const ProbabilityMap& probs, const FeatureTensor* features) {
  auto g = softmax_grids(probs);
  UncertaintyHeatmaps maps{std::move(g.one_minus_max), std::move(g.entropy), std::move(g.margin), std::nullopt};
  if (features != nullptr) maps.gradient_norm = gradient_norm(probs, *features);
  return maps;
}

}  // namespace segqual
