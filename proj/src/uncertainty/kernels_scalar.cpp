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

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels.hpp"

namespace segqual::simd::detail {

void softmax_measures_scalar(const float* probs, std::size_t pixels, std::size_t num_classes,
                             double* one_minus_max, double* entropy, double* margin) {
  const double inv_log_n = 1.0 / std::log(static_cast<double>(num_classes));
  for (std::size_t i = 0; i < pixels; ++i) {
    const float* p = probs + i * num_classes;
    double top1 = p[0];
    double top2 = -std::numeric_limits<double>::infinity();
    double plogp = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      const double v = p[k];
      if (k > 0) {
        top2 = std::max(top2, std::min(top1, v));
        top1 = std::max(top1, v);
      }
      plogp += v * std::log(std::max(v, kLogClamp));
    }
    one_minus_max[i] = 1.0 - top1;
    entropy[i] = finish_entropy(plogp, inv_log_n);
    margin[i] = top1 - top2;
  }
}

void gradient_norms_scalar(const float* probs, std::size_t pixels, std::size_t num_classes,
                           const float* features, std::size_t channels, double* out) {
  for (std::size_t i = 0; i < pixels; ++i) {
    const float* p = probs + i * num_classes;
    std::size_t predicted = 0;
    for (std::size_t k = 1; k < num_classes; ++k) {
      if (p[k] > p[predicted]) predicted = k;
    }
    double class_sq = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (k == predicted) continue;
      const double v = p[k];
      class_sq += v * v;
    }
    const float* psi = features + i * channels;
    double feature_sq = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = psi[c];
      feature_sq += v * v;
    }
    out[i] = std::sqrt(class_sq) * std::sqrt(feature_sq);
  }
}

}  // namespace segqual::simd::detail
