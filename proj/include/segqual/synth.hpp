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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "segqual/manifest.hpp"
#include "segqual/types.hpp"

namespace segqual {

/// Synthetic scenes: a Voronoi ground truth, a corrupted prediction and a
/// softmax map whose argmax reproduces the prediction.
struct SynthConfig {
  std::size_t image_size = 128;
  std::size_t num_classes = 8;
  std::size_t voronoi_cells = 12;
  /// Cells labeled background; the remaining cells draw foreground classes.
  std::size_t background_cells = 3;

  /// Expected number of injected blobs per image (Poisson).
  double false_segment_rate = 3.0;
  std::size_t false_segment_min = 12;
  std::size_t false_segment_max = 120;
  /// Amplitude in pixels of the smooth boundary displacement.
  double boundary_jitter = 2.0;
  double class_swap_prob = 0.02;

  double correct_confidence = 0.85;
  double wrong_confidence = 0.55;
  /// Standard deviation of the logit-normal confidence noise.
  double noise_temp = 0.6;

  /// Channels of the synthetic pre-logit feature tensor; 0 writes none.
  std::size_t feature_channels = 4;

  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

struct InjectedSegment {
  ClassId cls = 0;
  std::vector<PixelIndex> pixels;
};

struct SynthImage {
  std::string image_id;
  SegmentationMask ground_truth;
  SegmentationMask prediction;
  ProbabilityMap probabilities;
  std::optional<FeatureTensor> features;
  std::vector<InjectedSegment> injected;
  std::map<std::string, std::string> categories;
};

/// Deterministic in (config, index).
SynthImage generate_image(const SynthConfig& config, std::size_t index);

/// Writes <id>_prob.npy, <id>_pred.npy, <id>_gt.png [, <id>_features.npy]
/// and manifest.json into out_dir; returns the loaded manifest.
DatasetManifest generate_corpus(const SynthConfig& config, std::size_t count,
                                const std::filesystem::path& out_dir, std::size_t threads = 1);

}  // namespace segqual
