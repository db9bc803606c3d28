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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "segqual/types.hpp"

namespace segqual {

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path prob_path;
  std::optional<std::filesystem::path> pred_mask_path;
  std::optional<std::filesystem::path> gt_mask_path;
  std::optional<std::filesystem::path> features_path;
  std::map<std::string, std::string> categories;
};

/// JSON dataset description. Relative paths are resolved against the
/// directory holding the manifest file.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::size_t num_classes = 0;
  ClassId background_class = kDefaultBackground;

  bool all_have_ground_truth() const;
  bool all_have_features() const;
};

/// Rejects duplicate image ids and entries whose files do not exist.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Paths are written relative to the manifest directory when possible.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

DatasetManifest manifest_from_json(const std::string& text, const std::filesystem::path& base_dir,
                                   bool check_files = true);
std::string manifest_to_json(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

}  // namespace segqual
