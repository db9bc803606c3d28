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

#include "doctest.h"
#include "oracles.hpp"
#include "segqual/manifest.hpp"
#include "segqual/quality.hpp"
#include "segqual/synth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace segqual;

namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.image_size = 48;
  c.num_classes = 6;
  c.voronoi_cells = 8;
  c.false_segment_max = 60;
  c.seed = 123;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("configuration validation") {
  auto c = small_config();
  c.voronoi_cells = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.background_cells = c.voronoi_cells;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.false_segment_min = 80;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.class_swap_prob = 1.5;
  CHECK_THROWS_AS(generate_image(c, 0), ConfigError);
  CHECK_NOTHROW(small_config().validate());
}

TEST_CASE("no corruption reproduces the ground truth") {
  auto c = small_config();
  c.false_segment_rate = 0.0;
  c.boundary_jitter = 0.0;
  c.class_swap_prob = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto img = generate_image(c, i);
    CHECK(img.prediction == img.ground_truth);
    CHECK(img.injected.empty());
    const auto pd = decompose(img.prediction, 0);
    const auto gd = decompose(img.ground_truth, 0);
    for (const auto& q : segment_qualities(pd, img.prediction, gd)) CHECK(q.precision_p == 1.0);
  }
}

TEST_CASE("injected segments are connected, sized and wholly wrong") {
  auto c = small_config();
  c.boundary_jitter = 0.0;
  c.class_swap_prob = 0.0;
  c.false_segment_rate = 4.0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    const auto img = generate_image(c, i);
    const auto pd = decompose(img.prediction, 0);
    const auto gd = decompose(img.ground_truth, 0);
    for (const auto& inj : img.injected) {
      ++seen;
      CHECK(inj.pixels.size() >= c.false_segment_min);
      CHECK(inj.pixels.size() <= c.false_segment_max);
      const auto& seg = pd.segment(pd.id_map[inj.pixels.front()]);
      CHECK(seg.cls == inj.cls);
      CHECK(oracle::PixelSet(seg.pixels.begin(), seg.pixels.end()) ==
            oracle::PixelSet(inj.pixels.begin(), inj.pixels.end()));
      CHECK(segment_quality(seg, img.prediction, gd).precision_p == 0.0);
    }
  }
  CHECK(seen > 60);
}

TEST_CASE("softmax argmax equals the prediction") {
  const auto c = small_config();
  for (std::size_t i = 0; i < 20; ++i) {
    const auto img = generate_image(c, i);
    CHECK_NOTHROW(img.probabilities.validate());
    CHECK(argmax_mask(img.probabilities) == img.prediction);
    REQUIRE(img.features.has_value());
    CHECK(img.features->channels() == c.feature_channels);
    CHECK(img.categories.count("lighting") == 1);
    CHECK(img.categories.count("surface") == 1);
  }
}

TEST_CASE("false segment count follows the configured rate") {
  auto c = small_config();
  c.image_size = 96;
  c.false_segment_rate = 3.0;
  const std::size_t images = 200;
  double total = 0.0;
  for (std::size_t i = 0; i < images; ++i) total += static_cast<double>(generate_image(c, i).injected.size());
  const double mean = total / images;
  const double sigma = std::sqrt(c.false_segment_rate / images);
  CHECK(std::abs(mean - c.false_segment_rate) <= 3.0 * sigma);
}

TEST_CASE("corpus generation is byte-deterministic across thread counts") {
  const auto c = small_config();
  oracle::TempDir a("synth_a"), b("synth_b");
  const auto ma = generate_corpus(c, 12, a.path(), 1);
  const auto mb = generate_corpus(c, 12, b.path(), 4);
  CHECK(ma.entries.size() == 12);
  CHECK(ma.num_classes == c.num_classes);
  CHECK(ma.all_have_ground_truth());
  CHECK(ma.all_have_features());
  const auto ta = tree_bytes(a.path());
  const auto tb = tree_bytes(b.path());
  CHECK(ta.size() >= 12 * 4);
  CHECK(ta == tb);
  const auto loaded = load_manifest(a.path() / "manifest.json");
  REQUIRE(loaded.entries.size() == 12);
  CHECK(loaded.entries[3].image_id == "img_0003");
  CHECK(loaded.entries[3].categories == generate_image(c, 3).categories);

  auto other = c;
  other.seed = 124;
  oracle::TempDir d("synth_d");
  generate_corpus(other, 12, d.path(), 1);
  CHECK(tree_bytes(d.path()) != ta);
}
