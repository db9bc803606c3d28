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

#include "segqual/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "segqual/errors.hpp"
#include "segqual/geometry.hpp"
#include "segqual/npy.hpp"
#include "segqual/parallel.hpp"
#include "segqual/random.hpp"

namespace segqual {

namespace {

constexpr int kBlobAttempts = 50;

struct Cell {
  double y = 0.0;
  double x = 0.0;
  ClassId gt_class = 0;
  ClassId pred_class = 0;
};

// Smooth image warp; with amplitude * frequency < 1 it is invertible, so
// cells move their boundaries without breaking apart.
struct Warp {
  double amplitude = 0.0;
  double fy[2] = {}, fx[2] = {}, phase[4] = {};

  std::pair<double, double> apply(double y, double x) const {
    if (amplitude == 0.0) return {y, x};
    return {y + amplitude * std::sin(fx[0] * x + fy[0] * y + phase[0]) * std::cos(fx[1] * x + phase[1]),
            x + amplitude * std::sin(fy[1] * y + fx[1] * x + phase[2]) * std::cos(fy[0] * y + phase[3])};
  }
};

std::vector<std::size_t> assign_cells(const std::vector<Cell>& cells, std::size_t size, const Warp& warp) {
  std::vector<std::size_t> owner(size * size, 0);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const auto [y, x] = warp.apply(static_cast<double>(r), static_cast<double>(c));
      double best = 0.0;
      std::size_t arg = 0;
      for (std::size_t j = 0; j < cells.size(); ++j) {
        const double dy = y - cells[j].y;
        const double dx = x - cells[j].x;
        const double d = dy * dy + dx * dx;
        if (j == 0 || d < best) {
          best = d;
          arg = j;
        }
      }
      owner[r * size + c] = arg;
    }
  }
  return owner;
}

template <typename F>
void for_each_4(std::size_t p, std::size_t size, F&& f) {
  const std::size_t r = p / size;
  const std::size_t c = p % size;
  if (r > 0) f(p - size);
  if (r + 1 < size) f(p + size);
  if (c > 0) f(p - 1);
  if (c + 1 < size) f(p + 1);
}

// Random connected growth from a seed pixel; pixels flagged in `blocked`
// are never used. Returns an empty vector when the target is unreachable.
std::vector<PixelIndex> grow_blob(Rng& rng, std::size_t size, std::size_t target, const std::vector<char>& blocked) {
  const std::size_t seed = rng.below(size * size);
  if (blocked[seed]) return {};
  std::vector<PixelIndex> blob{static_cast<PixelIndex>(seed)};
  std::set<PixelIndex> member{static_cast<PixelIndex>(seed)};
  std::size_t stalls = 0;
  while (blob.size() < target) {
    const PixelIndex from = blob[rng.below(blob.size())];
    std::vector<PixelIndex> options;
    for_each_4(from, size, [&](std::size_t q) {
      if (!blocked[q] && !member.count(static_cast<PixelIndex>(q))) options.push_back(static_cast<PixelIndex>(q));
    });
    if (options.empty()) {
      if (++stalls > 20 * target) return {};
      continue;
    }
    const PixelIndex q = options[rng.below(options.size())];
    blob.push_back(q);
    member.insert(q);
  }
  std::sort(blob.begin(), blob.end());
  return blob;
}

std::string image_name(std::size_t index, std::size_t count) {
  std::size_t digits = 4;
  for (std::size_t v = count; v >= 10000; v /= 10) ++digits;
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%0*zu", static_cast<int>(digits), index);
  return buf;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

void SynthConfig::validate() const {
  if (image_size < 4) throw ConfigError("image_size must be at least 4");
  if (num_classes < 2 || num_classes > 65535) throw ConfigError("num_classes must be in [2, 65535]");
  if (voronoi_cells == 0) throw ConfigError("voronoi_cells must be positive");
  if (voronoi_cells > image_size * image_size) throw ConfigError("more Voronoi cells than pixels");
  if (background_cells >= voronoi_cells) throw ConfigError("background_cells must be below voronoi_cells");
  if (!(false_segment_rate >= 0.0)) throw ConfigError("false_segment_rate must be >= 0");
  if (false_segment_min == 0 || false_segment_min > false_segment_max) {
    throw ConfigError("false segment size range must satisfy 1 <= min <= max");
  }
  if (false_segment_max > image_size * image_size / 4) throw ConfigError("false_segment_max too large for the image");
  if (!(boundary_jitter >= 0.0)) throw ConfigError("boundary_jitter must be >= 0");
  if (!(class_swap_prob >= 0.0 && class_swap_prob <= 1.0)) throw ConfigError("class_swap_prob must be in [0, 1]");
  if (!(correct_confidence > 0.0 && correct_confidence < 1.0) || !(wrong_confidence > 0.0 && wrong_confidence < 1.0)) {
    throw ConfigError("confidences must be in (0, 1)");
  }
  if (!(noise_temp >= 0.0)) throw ConfigError("noise_temp must be >= 0");
}

SynthImage generate_image(const SynthConfig& config, std::size_t index) {
  config.validate();
  Rng rng(derive_seed(config.seed, index));
  const std::size_t S = config.image_size;
  const std::size_t P = S * S;
  const std::size_t N = config.num_classes;

  SynthImage img;
  img.image_id = image_name(index, index + 1);
  img.categories["lighting"] = rng.bernoulli(0.5) ? "bright" : "dim";
  img.categories["surface"] = rng.bernoulli(0.5) ? "clean" : "dirty";

  // Scene. The first background_cells cells are background; the rest draw
  // foreground classes.
  std::vector<Cell> cells(config.voronoi_cells);
  for (std::size_t j = 0; j < cells.size(); ++j) {
    Cell& c = cells[j];
    c.y = rng.uniform(0.0, static_cast<double>(S));
    c.x = rng.uniform(0.0, static_cast<double>(S));
    const bool foreground = j >= config.background_cells;
    c.gt_class = foreground ? static_cast<ClassId>(1 + rng.below(N - 1)) : 0;
    c.pred_class = c.gt_class;
    if (foreground && N > 2 && rng.bernoulli(config.class_swap_prob)) {
      const auto shift = static_cast<ClassId>(1 + rng.below(N - 2));
      c.pred_class = static_cast<ClassId>(1 + (c.gt_class - 1 + shift) % (N - 1));
    }
  }
  Warp warp;
  warp.amplitude = config.boundary_jitter;
  for (auto& f : warp.fy) f = rng.uniform(0.04, 0.12);
  for (auto& f : warp.fx) f = rng.uniform(0.04, 0.12);
  for (auto& p : warp.phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const auto gt_owner = assign_cells(cells, S, Warp{});
  const auto pred_owner = warp.amplitude > 0.0 ? assign_cells(cells, S, warp) : gt_owner;
  img.ground_truth = SegmentationMask(S, S);
  img.prediction = SegmentationMask(S, S);
  for (std::size_t p = 0; p < P; ++p) {
    img.ground_truth[p] = cells[gt_owner[p]].gt_class;
    img.prediction[p] = cells[pred_owner[p]].pred_class;
  }

  // False blobs, kept apart from each other by one pixel.
  const std::size_t blobs = rng.poisson(config.false_segment_rate);
  std::vector<char> blocked(P, 0);
  std::vector<char> in_scene(N, 0);
  for (std::size_t p = 0; p < P; ++p) in_scene[img.ground_truth[p]] = 1;
  for (std::size_t b = 0; b < blobs; ++b) {
    for (int attempt = 0; attempt < kBlobAttempts; ++attempt) {
      const std::size_t target =
          config.false_segment_min + rng.below(config.false_segment_max - config.false_segment_min + 1);
      auto blob = grow_blob(rng, S, target, blocked);
      if (blob.empty()) continue;
      std::vector<char> near(N, 0);
      for (const PixelIndex p : blob) {
        near[img.ground_truth[p]] = 1;
        near[img.prediction[p]] = 1;
        for_each_4(p, S, [&](std::size_t q) {
          near[img.ground_truth[q]] = 1;
          near[img.prediction[q]] = 1;
        });
      }
      // Prefer classes the scene does not contain at all.
      std::vector<ClassId> allowed;
      std::vector<ClassId> absent;
      for (std::size_t k = 1; k < N; ++k) {
        if (near[k]) continue;
        allowed.push_back(static_cast<ClassId>(k));
        if (!in_scene[k]) absent.push_back(static_cast<ClassId>(k));
      }
      if (!absent.empty()) allowed = std::move(absent);
      if (allowed.empty()) continue;
      const ClassId cls = allowed[rng.below(allowed.size())];
      for (const PixelIndex p : blob) {
        img.prediction[p] = cls;
        blocked[p] = 1;
        for_each_4(p, S, [&](std::size_t q) { blocked[q] = 1; });
      }
      img.injected.push_back({cls, std::move(blob)});
      break;
    }
  }

  // Softmax. Regions are connected components of the prediction (background
  // included); each carries one logit offset, each pixel adds a smaller one.
  const auto regions = decompose(img.prediction, static_cast<ClassId>(N));
  std::vector<double> region_noise(regions.segments.size());
  for (auto& v : region_noise) v = config.noise_temp * rng.normal();
  const double floor_conf = std::max(0.3, 1.0 / static_cast<double>(N) + 0.1);
  const double logit_correct = logit(config.correct_confidence);
  const double logit_wrong = logit(config.wrong_confidence);
  std::vector<float> probs(P * N);
  std::vector<double> row(N);
  for (std::size_t p = 0; p < P; ++p) {
    const ClassId pred = img.prediction[p];
    const ClassId gt = img.ground_truth[p];
    const double z = (pred == gt ? logit_correct : logit_wrong) + region_noise[regions.id_map[p] - 1] +
                     0.5 * config.noise_temp * rng.normal();
    const double conf = std::clamp(1.0 / (1.0 + std::exp(-z)), floor_conf, 0.999);
    ClassId runner = gt;
    if (runner == pred) runner = static_cast<ClassId>((pred + 1 + rng.below(N - 1)) % N);
    std::fill(row.begin(), row.end(), 0.0);
    row[pred] = conf;
    if (N == 2) {
      row[runner] = 1.0 - conf;
    } else {
      const double second = std::min(rng.uniform(0.5, 0.9) * (1.0 - conf), 0.95 * conf);
      row[runner] = second;
      const double rest = (1.0 - conf - second) / static_cast<double>(N - 2);
      for (std::size_t k = 0; k < N; ++k) {
        if (k != pred && k != runner) row[k] = rest;
      }
    }
    float* out = probs.data() + p * N;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < N; ++k) {
      out[k] = static_cast<float>(row[k]);
      if (out[k] > out[arg]) arg = k;
    }
    if (arg != pred) throw ContractViolation("synthetic softmax argmax disagrees with the prediction");
  }
  img.probabilities = ProbabilityMap(S, S, N, std::move(probs));

  if (config.feature_channels > 0) {
    const std::size_t C = config.feature_channels;
    std::vector<float> feats(P * C);
    for (auto& v : feats) v = static_cast<float>(1.0 + 0.25 * rng.normal());
    img.features = FeatureTensor(S, S, C, std::move(feats));
  }
  return img;
}

DatasetManifest generate_corpus(const SynthConfig& config, std::size_t count, const std::filesystem::path& out_dir,
                                std::size_t threads) {
  config.validate();
  std::filesystem::create_directories(out_dir);
  DatasetManifest manifest;
  manifest.num_classes = config.num_classes;
  manifest.background_class = kDefaultBackground;
  manifest.entries.resize(count);
  parallel_for(count, threads, [&](std::size_t i) {
    SynthImage img = generate_image(config, i);
    img.image_id = image_name(i, count);
    ManifestEntry& e = manifest.entries[i];
    e.image_id = img.image_id;
    e.prob_path = out_dir / (img.image_id + "_prob.npy");
    e.pred_mask_path = out_dir / (img.image_id + "_pred.npy");
    e.gt_mask_path = out_dir / (img.image_id + "_gt.png");
    e.categories = img.categories;
    write_probability_map(e.prob_path, img.probabilities);
    write_mask_npy(*e.pred_mask_path, img.prediction);
    write_mask_png(*e.gt_mask_path, img.ground_truth);
    if (img.features) {
      e.features_path = out_dir / (img.image_id + "_features.npy");
      write_feature_tensor(*e.features_path, *img.features);
    }
  });
  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace segqual
