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

#include <cstring>

#include "doctest.h"
#include "oracles.hpp"
#include "segqual/manifest.hpp"
#include "segqual/npy.hpp"
#include "segqual/records.hpp"

using namespace segqual;

namespace {

// NPY v1.0 file laid out the way numpy writes it.
std::vector<std::byte> numpy_style(const std::string& dict, const void* payload, std::size_t bytes) {
  std::string header = dict;
  while ((10 + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  std::string out = std::string("\x93NUMPY\x01\x00", 8);
  out += static_cast<char>(header.size() & 0xff);
  out += static_cast<char>(header.size() >> 8);
  out += header;
  std::vector<std::byte> v(out.size() + bytes);
  std::memcpy(v.data(), out.data(), out.size());
  std::memcpy(v.data() + out.size(), payload, bytes);
  return v;
}

}  // namespace

TEST_CASE("probability map read from a numpy-layout file") {
  oracle::TempDir dir("dm_uniform");
  const std::vector<float> values(8, 0.5f);
  write_file(dir / "p.npy", numpy_style("{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2, 2), }",
                                             values.data(), values.size() * 4));
  const auto probs = read_probability_map(dir / "p.npy");
  CHECK(probs.height() == 2);
  CHECK(probs.width() == 2);
  CHECK(probs.num_classes() == 2);
  for (const float v : probs.values()) CHECK(v == 0.5f);
}

TEST_CASE("probability sums outside tolerance are rejected with the pixel named") {
  oracle::TempDir dir("dm_sum");
  std::vector<float> values = {0.5f, 0.5f, 0.4f, 0.4f, 1.0f, 0.0f, 0.0f, 1.0f};
  npy::write_f32(dir / "p.npy", std::vector<std::size_t>{2, 2, 2}, values);
  try {
    (void)read_probability_map(dir / "p.npy");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("(0, 1)") != std::string::npos);
  }
}

TEST_CASE("probability map write/read is bit exact") {
  oracle::TempDir dir("dm_roundtrip");
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto probs = oracle::random_probs(rng, 1 + rng.below(9), 1 + rng.below(9), 2 + rng.below(6));
    write_probability_map(dir / "p.npy", probs);
    CHECK(read_probability_map(dir / "p.npy") == probs);
  }
}

TEST_CASE("malformed NPY containers are format errors") {
  oracle::TempDir dir("dm_bad");
  const float v[2] = {0.5f, 0.5f};
  SUBCASE("wrong dtype") {
    write_file(dir / "p.npy", numpy_style("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 1), }", v, 8));
    CHECK_THROWS_AS((void)read_probability_map(dir / "p.npy"), FormatError);
  }
  SUBCASE("fortran order") {
    write_file(dir / "p.npy", numpy_style("{'descr': '<f4', 'fortran_order': True, 'shape': (1, 1, 2), }", v, 8));
    CHECK_THROWS_AS((void)read_probability_map(dir / "p.npy"), FormatError);
  }
  SUBCASE("big endian") {
    write_file(dir / "p.npy", numpy_style("{'descr': '>f4', 'fortran_order': False, 'shape': (1, 1, 2), }", v, 8));
    CHECK_THROWS_AS((void)read_probability_map(dir / "p.npy"), FormatError);
  }
  SUBCASE("truncated payload") {
    write_file(dir / "p.npy", numpy_style("{'descr': '<f4', 'fortran_order': False, 'shape': (1, 1, 2), }", v, 6));
    CHECK_THROWS_AS((void)read_probability_map(dir / "p.npy"), FormatError);
  }
  SUBCASE("no magic") {
    write_text(dir / "p.npy", "not an array");
    CHECK_THROWS_AS((void)read_probability_map(dir / "p.npy"), FormatError);
  }
}

TEST_CASE("missing files are I/O errors") {
  CHECK_THROWS_AS((void)read_probability_map("/nonexistent/segqual/p.npy"), IoError);
}

TEST_CASE("mask PNG decoding and label validation") {
  oracle::TempDir dir("dm_png");
  SUBCASE("constant 3 with five classes") {
    write_mask_png(dir / "m.png", SegmentationMask(4, 6, ClassId{3}));
    const auto m = read_mask(dir / "m.png", 5);
    CHECK(m == SegmentationMask(4, 6, ClassId{3}));
  }
  SUBCASE("label 7 with five classes names the coordinate") {
    SegmentationMask m(3, 3, ClassId{1});
    m(2, 1) = 7;
    write_mask_png(dir / "m.png", m);
    try {
      (void)read_mask(dir / "m.png", 5);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("(2, 1)") != std::string::npos);
    }
  }
  SUBCASE("16-bit labels") {
    SegmentationMask m(2, 3, ClassId{300});
    m(0, 0) = 0;
    m(1, 2) = 1000;
    write_mask_png(dir / "m.png", m);
    CHECK(read_mask(dir / "m.png", 1001) == m);
  }
}

TEST_CASE("NPY and PNG encodings of the same mask decode equal") {
  oracle::TempDir dir("dm_cross");
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto m = oracle::random_mask(rng, 1 + rng.below(20), 1 + rng.below(20), 9);
    write_mask_npy(dir / "m.npy", m);
    write_mask_png(dir / "m.png", m);
    CHECK(read_mask(dir / "m.npy", 9) == m);
    CHECK(read_mask(dir / "m.png", 9) == m);
  }
}

TEST_CASE("argmax takes the smallest index on ties") {
  const ProbabilityMap probs(1, 3, 2, {0.5f, 0.5f, 0.3f, 0.7f, 0.9f, 0.1f});
  const auto m = argmax_mask(probs);
  CHECK(m[0] == 0);
  CHECK(m[1] == 1);
  CHECK(m[2] == 0);
  const auto single = argmax_mask(ProbabilityMap(1, 1, 3, {0.1f, 0.7f, 0.2f}));
  CHECK(single[0] == 1);
}

TEST_CASE("argmax matches a per-pixel scan and survives rescaling") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto probs = oracle::random_probs(rng, 8, 8, 4);
    const auto m = argmax_mask(probs);
    std::vector<float> scaled(probs.values().begin(), probs.values().end());
    for (std::size_t i = 0; i < 64; ++i) {
      const auto px = probs.pixel(i);
      std::size_t best = 0;
      for (std::size_t k = 1; k < 4; ++k) {
        if (px[k] > px[best]) best = k;
      }
      CHECK(m[i] == best);
      const float factor = static_cast<float>(rng.uniform(0.5, 2.0));
      float sum = 0.0f;
      for (std::size_t k = 0; k < 4; ++k) sum += scaled[i * 4 + k] *= factor;
      for (std::size_t k = 0; k < 4; ++k) scaled[i * 4 + k] /= sum;
    }
    CHECK(argmax_mask(ProbabilityMap(8, 8, 4, scaled)) == m);
  }
}

TEST_CASE("feature tensors and id maps round-trip") {
  oracle::TempDir dir("dm_feat");
  std::vector<float> v(3 * 4 * 5);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i) * 0.25f - 3.0f;
  const FeatureTensor t(3, 4, 5, v);
  write_feature_tensor(dir / "f.npy", t);
  CHECK(read_feature_tensor(dir / "f.npy") == t);

  Grid<SegmentId> ids(2, 2, 0);
  ids[3] = 70000;
  write_id_map(dir / "ids.npy", ids);
  const auto arr = npy::read(dir / "ids.npy");
  CHECK(arr.header.descr == "<u4");
  CHECK(arr.header.shape == std::vector<std::size_t>{2, 2});
}

TEST_CASE("manifest round trip, order and validation") {
  oracle::TempDir dir("dm_manifest");
  write_probability_map(dir / "a_prob.npy", ProbabilityMap(1, 1, 2, {0.3f, 0.7f}));
  write_probability_map(dir / "b_prob.npy", ProbabilityMap(1, 1, 2, {0.6f, 0.4f}));
  write_mask_png(dir / "b_gt.png", SegmentationMask(1, 1, ClassId{1}));

  DatasetManifest m;
  m.num_classes = 2;
  m.entries.push_back({"zeta", dir / "b_prob.npy", std::nullopt, dir / "b_gt.png", std::nullopt, {{"exposure", "dark"}}});
  m.entries.push_back({"alpha", dir / "a_prob.npy", std::nullopt, std::nullopt, std::nullopt, {}});
  save_manifest(m, dir / "manifest.json");

  const auto text = read_text(dir / "manifest.json");
  CHECK(text.find(dir.path().string()) == std::string::npos);  // relative paths on disk

  const auto back = load_manifest(dir / "manifest.json");
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].image_id == "zeta");
  CHECK(back.entries[1].image_id == "alpha");
  CHECK(back.entries[0].gt_mask_path == std::filesystem::path(dir / "b_gt.png"));
  CHECK(back.entries[0].categories.at("exposure") == "dark");
  CHECK_FALSE(back.all_have_ground_truth());

  SUBCASE("duplicate ids") {
    auto dup = m;
    dup.entries[1].image_id = "zeta";
    write_text(dir / "dup.json", manifest_to_json(dup, dir.path()));
    CHECK_THROWS_AS((void)load_manifest(dir / "dup.json"), ValidationError);
  }
  SUBCASE("missing file") {
    auto missing = m;
    missing.entries[1].prob_path = dir / "nope.npy";
    write_text(dir / "missing.json", manifest_to_json(missing, dir.path()));
    CHECK_THROWS_AS((void)load_manifest(dir / "missing.json"), IoError);
  }
  SUBCASE("schema error") {
    write_text(dir / "bad.json", "{\"entries\": 3}");
    CHECK_THROWS_AS((void)load_manifest(dir / "bad.json"), FormatError);
  }
}

TEST_CASE("low-quality labelling is inclusive at the threshold") {
  CHECK(is_low_quality(0.5));
  CHECK(is_low_quality(0.0));
  CHECK_FALSE(is_low_quality(0.5000001));
  CHECK_FALSE(is_low_quality(0.7, 0.6));
}

TEST_CASE("feature tables round-trip through CSV and JSON lines") {
  FeatureTable t;
  t.feature_columns = {"mean_entropy", "relative_size"};
  SegmentRecord a;
  a.image_id = "img,\"quoted\"";
  a.segment_id = 3;
  a.predicted_class = 2;
  a.pixel_count = 17;
  a.image_pixels = 100;
  a.features = {0.1 + 0.2, 0.17};
  a.precision_p = 1.0 / 3.0;
  a.iou = 0.25;
  a.iou_adj = 0.3;
  a.target_low_quality = true;
  a.uncertainty_score = 0.9;
  SegmentRecord b = a;
  b.image_id = "plain";
  b.segment_id = 4;
  b.features = {5e-324, 1.0};
  t.records = {a, b};

  CHECK(table_from_csv(table_to_csv(t)) == t);
  CHECK(table_from_jsonl(table_to_jsonl(t)) == t);

  const auto header = table_to_csv(t).substr(0, table_to_csv(t).find('\n'));
  CHECK(header ==
        "image_id,segment_id,predicted_class,pixel_count,image_pixels,mean_entropy,relative_size,"
        "precision_p,iou,iou_adj,target_low_quality,uncertainty_score");

  FeatureTable bare = t;
  for (auto& r : bare.records) {
    r.precision_p.reset();
    r.iou.reset();
    r.iou_adj.reset();
    r.target_low_quality.reset();
    r.uncertainty_score.reset();
  }
  const auto csv = table_to_csv(bare);
  CHECK(csv.find("precision_p") == std::string::npos);
  CHECK(table_from_csv(csv) == bare);
}

TEST_CASE("CSV rejects rows with the wrong field count") {
  CHECK_THROWS_AS((void)table_from_csv("image_id,segment_id,predicted_class,pixel_count,image_pixels,f\nx,1,0,1,4\n"),
                  FormatError);
}
