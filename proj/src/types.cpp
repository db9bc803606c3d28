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

#include "segqual/types.hpp"

#include <cmath>
#include <string>

namespace segqual {

void SegmentationMask::validate(std::size_t num_classes) const {
  for (std::size_t r = 0; r < height(); ++r) {
    for (std::size_t c = 0; c < width(); ++c) {
      const ClassId label = (*this)(r, c);
      if (label >= num_classes) {
        throw ValidationError("label " + std::to_string(label) + " at (" + std::to_string(r) + ", " +
                              std::to_string(c) + ") is outside [0, " + std::to_string(num_classes) + ")");
      }
    }
  }
}

ProbabilityMap::ProbabilityMap(std::size_t height, std::size_t width, std::size_t num_classes,
                               std::vector<float> values)
    : height_(height), width_(width), num_classes_(num_classes), values_(std::move(values)) {
  if (num_classes_ < 2) throw ValidationError("probability map needs at least 2 classes");
  if (values_.size() != height_ * width_ * num_classes_) {
    throw ValidationError("probability payload has " + std::to_string(values_.size()) + " values, expected " +
                          std::to_string(height_ * width_ * num_classes_));
  }
}

void ProbabilityMap::validate() const {
  double worst_error = 0.0;
  std::size_t worst_pixel = 0;
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    double sum = 0.0;
    for (const float v : pixel(i)) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw ValidationError("probability " + std::to_string(v) + " outside [0, 1] at pixel (" +
                              std::to_string(i / width_) + ", " + std::to_string(i % width_) + ")");
      }
      sum += v;
    }
    const double error = std::abs(sum - 1.0);
    if (error > worst_error) {
      worst_error = error;
      worst_pixel = i;
    }
  }
  if (worst_error > kSumTolerance) {
    throw ValidationError("probabilities do not sum to 1: worst pixel (" + std::to_string(worst_pixel / width_) +
                          ", " + std::to_string(worst_pixel % width_) + ") is off by " +
                          std::to_string(worst_error));
  }
}

FeatureTensor::FeatureTensor(std::size_t height, std::size_t width, std::size_t channels,
                             std::vector<float> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
  if (values_.size() != height_ * width_ * channels_) {
    throw ValidationError("feature payload has " + std::to_string(values_.size()) + " values, expected " +
                          std::to_string(height_ * width_ * channels_));
  }
}

SegmentationMask argmax_mask(const ProbabilityMap& probs) {
  SegmentationMask mask(probs.height(), probs.width());
  for (std::size_t i = 0; i < probs.pixel_count(); ++i) {
    const auto p = probs.pixel(i);
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.size(); ++k) {
      if (p[k] > p[best]) best = k;
    }
    mask[i] = static_cast<ClassId>(best);
  }
  return mask;
}

}  // namespace segqual
