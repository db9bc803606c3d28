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

#include <optional>
#include <span>
#include <string_view>

#include "segqual/types.hpp"

namespace segqual {

/// Pixel-wise uncertainty measures. `margin` holds D = p_top1 - p_top2; the
/// segment features use 1 - D.
struct UncertaintyHeatmaps {
  Grid<double> one_minus_max;
  Grid<double> entropy;
  Grid<double> margin;
  std::optional<Grid<double>> gradient_norm;
};

Grid<double> one_minus_max_prob(const ProbabilityMap& probs);

/// -(1/log N) sum_k p_k log p_k, so a uniform pixel yields 1 and a one-hot
/// pixel 0. Probabilities are clamped to >= 1e-12 before the log.
Grid<double> normalized_entropy(const ProbabilityMap& probs);

Grid<double> top2_margin(const ProbabilityMap& probs);

/// ||psi|| * sqrt(sum_{k != argmax} p_k^2): the Frobenius norm of the outer
/// product of the class vector (predicted component zeroed) with psi.
Grid<double> gradient_norm(const ProbabilityMap& probs, const FeatureTensor& features);

UncertaintyHeatmaps compute_heatmaps(const ProbabilityMap& probs,
                                     const FeatureTensor* features = nullptr);

namespace simd {

enum class Level { scalar, avx2 };

std::string_view to_string(Level level);

/// Best level the running CPU supports.
Level detected_level();

/// detected_level(), unless SEGQUAL_SIMD=scalar forces the reference path.
Level active_level();

/// Fills the three softmax-derived measures for `pixels` consecutive pixels
/// of `num_classes` probabilities each.
void softmax_measures(Level level, std::span<const float> probs, std::size_t num_classes,
                      std::span<double> one_minus_max, std::span<double> entropy,
                      std::span<double> margin);

void gradient_norms(Level level, std::span<const float> probs, std::size_t num_classes,
                    std::span<const float> features, std::size_t channels, std::span<double> out);

}  // namespace simd

}  // namespace segqual
