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

#include "segqual/manifest.hpp"

#include <set>

#include "json.hpp"
#include "segqual/npy.hpp"

namespace segqual {

namespace {

using nlohmann::ordered_json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::string relativize(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (base.empty()) return p.generic_string();
  const auto rel = std::filesystem::absolute(p).lexically_normal().lexically_relative(
      std::filesystem::absolute(base).lexically_normal());
  if (rel.empty()) return p.generic_string();
  return rel.generic_string();
}

void check_exists(const std::filesystem::path& p, const std::string& image_id, std::string& missing) {
  if (!std::filesystem::exists(p)) missing += "\n  manifest entry '" + image_id + "': missing file " + p.string();
}

}  // namespace

bool DatasetManifest::all_have_ground_truth() const {
  for (const auto& e : entries) {
    if (!e.gt_mask_path) return false;
  }
  return true;
}

bool DatasetManifest::all_have_features() const {
  if (entries.empty()) return false;
  for (const auto& e : entries) {
    if (!e.features_path) return false;
  }
  return true;
}

DatasetManifest manifest_from_json(const std::string& text, const std::filesystem::path& base_dir,
                                   bool check_files) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest manifest;
  try {
    manifest.num_classes = doc.at("num_classes").get<std::size_t>();
    manifest.background_class = doc.value("background_class", static_cast<ClassId>(kDefaultBackground));
    std::set<std::string> seen;
    for (const auto& item : doc.at("entries")) {
      ManifestEntry entry;
      entry.image_id = item.at("image_id").get<std::string>();
      if (!seen.insert(entry.image_id).second) {
        throw ValidationError("manifest: duplicate image_id '" + entry.image_id + "'");
      }
      entry.prob_path = resolve(base_dir, item.at("prob_path").get<std::string>());
      auto optional_path = [&](const char* key) -> std::optional<std::filesystem::path> {
        if (!item.contains(key) || item[key].is_null()) return std::nullopt;
        return resolve(base_dir, item[key].get<std::string>());
      };
      entry.pred_mask_path = optional_path("pred_mask_path");
      entry.gt_mask_path = optional_path("gt_mask_path");
      entry.features_path = optional_path("features_path");
      if (item.contains("categories") && !item["categories"].is_null()) {
        for (const auto& [key, value] : item["categories"].items()) {
          entry.categories[key] = value.get<std::string>();
        }
      }
      manifest.entries.push_back(std::move(entry));
    }
  } catch (const ordered_json::exception& e) {
    throw FormatError(std::string("manifest schema error: ") + e.what());
  }
  if (manifest.num_classes < 2) throw ValidationError("manifest: num_classes must be at least 2");
  if (manifest.background_class >= manifest.num_classes) {
    throw ValidationError("manifest: background_class outside [0, num_classes)");
  }
  if (check_files) {
    std::string missing;
    for (const auto& e : manifest.entries) {
      check_exists(e.prob_path, e.image_id, missing);
      if (e.pred_mask_path) check_exists(*e.pred_mask_path, e.image_id, missing);
      if (e.gt_mask_path) check_exists(*e.gt_mask_path, e.image_id, missing);
      if (e.features_path) check_exists(*e.features_path, e.image_id, missing);
    }
    if (!missing.empty()) throw IoError("manifest references missing files:" + missing);
  }
  return manifest;
}

std::string manifest_to_json(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
  ordered_json doc;
  doc["num_classes"] = manifest.num_classes;
  doc["background_class"] = manifest.background_class;
  doc["entries"] = ordered_json::array();
  for (const auto& e : manifest.entries) {
    ordered_json item;
    item["image_id"] = e.image_id;
    item["prob_path"] = relativize(base_dir, e.prob_path);
    if (e.pred_mask_path) item["pred_mask_path"] = relativize(base_dir, *e.pred_mask_path);
    if (e.gt_mask_path) item["gt_mask_path"] = relativize(base_dir, *e.gt_mask_path);
    if (e.features_path) item["features_path"] = relativize(base_dir, *e.features_path);
    if (!e.categories.empty()) {
      ordered_json cats = ordered_json::object();
      for (const auto& [k, v] : e.categories) cats[k] = v;
      item["categories"] = cats;
    }
    doc["entries"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const auto base = path.parent_path();
  return manifest_from_json(read_text(path), base.empty() ? std::filesystem::path(".") : base);
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  auto base = path.parent_path();
  write_text(path, manifest_to_json(manifest, base.empty() ? std::filesystem::path(".") : base));
}

}  // namespace segqual
