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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "segqual/errors.hpp"

namespace segqual {

using ClassId = std::uint16_t;
using SegmentId = std::uint32_t;
using PixelIndex = std::uint32_t;

inline constexpr ClassId kDefaultBackground = 0;

/// Dense row-major 2-D grid.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), data_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_) {
      throw ValidationError("grid payload has " + std::to_string(data_.size()) +
                            " values, expected " + std::to_string(height_ * width_));
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
  T& operator[](std::size_t index) { return data_[index]; }
  const T& operator[](std::size_t index) const { return data_[index]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  bool same_shape(std::size_t height, std::size_t width) const noexcept {
    return height_ == height && width_ == width;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

/// Per-pixel predicted class indices.
class SegmentationMask : public Grid<ClassId> {
 public:
  using Grid<ClassId>::Grid;

  /// Throws ValidationError naming the first label >= num_classes.
  void validate(std::size_t num_classes) const;
};

/// Per-pixel softmax output, layout (row, column, class).
class ProbabilityMap {
 public:
  ProbabilityMap() = default;
  ProbabilityMap(std::size_t height, std::size_t width, std::size_t num_classes,
                 std::vector<float> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t pixel_count() const noexcept { return height_ * width_; }

  std::span<const float> pixel(std::size_t index) const {
    return std::span<const float>(values_).subspan(index * num_classes_, num_classes_);
  }
  std::span<const float> values() const noexcept { return values_; }

  /// Checks value range and per-pixel sums (tolerance kSumTolerance). The
  /// error message names the worst pixel.
  void validate() const;

  static constexpr double kSumTolerance = 1e-4;

  friend bool operator==(const ProbabilityMap&, const ProbabilityMap&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<float> values_;
};

/// Activations before the last convolution, layout (row, column, channel).
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(std::size_t height, std::size_t width, std::size_t channels,
                std::vector<float> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }

  std::span<const float> pixel(std::size_t index) const {
    return std::span<const float>(values_).subspan(index * channels_, channels_);
  }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<float> values_;
};

/// Predicted class per pixel; ties go to the smallest class index.
SegmentationMask argmax_mask(const ProbabilityMap& probs);

}  // namespace segqual
