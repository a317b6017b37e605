/*
 * Copyright 2026 The CasNN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "casnn/geometry/label_map.h"
#include "casnn/synthgen/synthgen.h"
#include "casnn/trainproto/dataset.h"

namespace casnn::synthgen {
namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.image_size = 768;
  c.seed = 5;
  return c;
}

struct MaskStats {
  std::size_t counts[4] = {0, 0, 0, 0};
  std::size_t tissue() const { return counts[1] + counts[2] + counts[3]; }
  double fraction(int v) const { return double(counts[v]) / double(tissue()); }
};

MaskStats stats_of(const Image8& mask) {
  MaskStats s;
  for (std::uint8_t v : mask.pixels) ++s.counts[v];
  return s;
}

geometry::LabelMap as_label_map(const Image8& mask) {
  geometry::LabelMap map(mask.height, mask.width, 1.0);
  map.labels = mask.pixels;
  return map;
}

TEST(SynthgenTest, DeterministicPerSeed) {
  const SynthConfig c = small_config();
  const SyntheticSlide a = generate_slide(c, 2, 77);
  const SyntheticSlide b = generate_slide(c, 2, 77);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_NE(generate_slide(c, 2, 78).mask, a.mask);
}

TEST(SynthgenTest, LabelsMatchMaskContents) {
  const SynthConfig c = small_config();
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (int label = 0; label < 3; ++label) {
      const SyntheticSlide s = generate_slide(c, label, seed);
      EXPECT_EQ(s.label, label);
      EXPECT_EQ(s.image.width, 768u);
      EXPECT_EQ(s.mask.channels, 1u);
      const MaskStats st = stats_of(s.mask);
      EXPECT_GT(st.counts[0], 0u);
      if (label == 0) {
        EXPECT_EQ(st.counts[2] + st.counts[3], 0u);
      } else if (label == 1) {
        EXPECT_EQ(st.counts[3], 0u);
        EXPECT_NEAR(st.fraction(2), c.dcis_fraction, 0.1 * c.dcis_fraction);
      } else {
        EXPECT_NEAR(st.fraction(3), c.idc_fraction, 0.1 * c.idc_fraction);
      }
    }
  }
}

TEST(SynthgenTest, LesionGrowthPatterns) {
  const SynthConfig c = small_config();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const geometry::LabelMap idc = as_label_map(generate_slide(c, 2, seed).mask);
    const auto masses = geometry::connected_components(idc, geometry::kIdc);
    ASSERT_FALSE(masses.empty());
    for (const auto& m : masses) EXPECT_GT(m.area_um2, 1500.0);
    const geometry::LabelMap dcis = as_label_map(generate_slide(c, 1, seed).mask);
    // Confined growth: separate ducts rather than one mass.
    EXPECT_GE(geometry::connected_components(dcis, geometry::kDcis).size(), 2u);
  }
}

TEST(SynthgenTest, ClassTexturesDiffer) {
  const SynthConfig c = small_config();
  double mean[3] = {0, 0, 0};
  for (int label = 0; label < 3; ++label) {
    const SyntheticSlide s = generate_slide(c, label, 1);
    const MaskStats st = stats_of(s.mask);
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.mask.pixels.size(); ++i) {
      if (s.mask.pixels[i] != label + 1) continue;
      sum += s.image.pixels[i * 3 + 1];
      ++n;
    }
    ASSERT_GT(n, 0u) << st.tissue();
    mean[label] = sum / double(n);
  }
  // Lesions are darker (denser nuclei, darker ground) than benign stroma.
  EXPECT_GT(mean[0] - mean[1], 20.0);
  EXPECT_GT(mean[0] - mean[2], 20.0);
}

TEST(SynthgenTest, ConfigJsonRoundTrip) {
  SynthConfig c = small_config();
  c.idc.nuclei_per_kpx = 9.0;
  c.slides_per_class = 3;
  const SynthConfig back = synth_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(synth_config_from_json({{"image_size", 32}}), DataError);
  EXPECT_THROW(synth_config_from_json({{"idc_fraction", 1.5}}), DataError);
  EXPECT_THROW(synth_config_from_json({{"duct_radius_min", 90.0}}), DataError);
}

TEST(SynthgenTest, DatasetSplitsAreDisjointAndStratified) {
  SynthConfig c = small_config();
  c.image_size = 512;
  c.slides_per_class = 4;
  c.threads = 2;
  const auto dir = std::filesystem::temp_directory_path() / "casnn_synth_test";
  std::filesystem::remove_all(dir);
  const trainproto::DatasetIndex index = generate(c, dir.string());
  ASSERT_EQ(index.slides.size(), 12u);
  std::set<std::string> ids;
  int test_per_class[3] = {0, 0, 0};
  for (const auto& r : index.slides) {
    EXPECT_TRUE(ids.insert(r.id).second);
    if (r.split == trainproto::Split::kTest) ++test_per_class[r.label];
    const trainproto::Slide slide = trainproto::load_slide(index, r);
    EXPECT_EQ(slide.mask, generate_slide(c, r.label, derive_seed(c.seed, ids.size() - 1)).mask);
  }
  for (int n : test_per_class) EXPECT_EQ(n, 1);
  const trainproto::DatasetIndex reloaded = trainproto::load_dataset_index(dir.string());
  EXPECT_EQ(reloaded.slides, index.slides);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace casnn::synthgen
