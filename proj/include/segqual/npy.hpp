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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segqual/types.hpp"

namespace segqual::npy {

struct Header {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;

  std::size_t element_count() const;
};

struct Array {
  Header header;
  std::vector<std::byte> payload;
};

/// Parses a complete .npy byte buffer (format versions 1.0 and 2.0).
Array parse(std::span<const std::byte> bytes);

/// Serializes a version 1.0 container. The header is padded so the payload
/// starts on a 64-byte boundary, as numpy does.
std::vector<std::byte> serialize(std::string_view descr, std::span<const std::size_t> shape,
                                 std::span<const std::byte> payload);

Array read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, std::string_view descr,
           std::span<const std::size_t> shape, std::span<const std::byte> payload);

// Typed helpers. Readers check descr, order and rank.
void write_f32(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const float> values);
void write_u16(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const std::uint16_t> values);
void write_u32(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const std::uint32_t> values);

}  // namespace segqual::npy

namespace segqual {

ProbabilityMap read_probability_map(const std::filesystem::path& path);
void write_probability_map(const std::filesystem::path& path, const ProbabilityMap& probs);

/// Reads an NPY (uint8/uint16, 2-D) or grayscale PNG (8/16-bit) mask. The
/// container is detected from the file signature.
SegmentationMask read_mask(const std::filesystem::path& path, std::size_t num_classes);
void write_mask_npy(const std::filesystem::path& path, const SegmentationMask& mask);
/// 8-bit PNG when every label fits, 16-bit otherwise.
void write_mask_png(const std::filesystem::path& path, const SegmentationMask& mask);

FeatureTensor read_feature_tensor(const std::filesystem::path& path);
void write_feature_tensor(const std::filesystem::path& path, const FeatureTensor& features);

/// Float32 (H, W) export of a heat map.
void write_heatmap(const std::filesystem::path& path, const Grid<double>& heatmap);
void write_id_map(const std::filesystem::path& path, const Grid<SegmentId>& ids);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace segqual
