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
#include <map>
#include <sstream>

#include "casnn/cascnn/dense.h"
#include "casnn/common/image.h"
#include "casnn/common/rng.h"
#include "casnn/trainproto/augment.h"
#include "casnn/trainproto/dataset.h"
#include "casnn/trainproto/mining.h"
#include "casnn/trainproto/preprocess.h"
#include "casnn/trainproto/sampler.h"
#include "casnn/trainproto/schedule.h"
#include "casnn/trainproto/trainer.h"

namespace casnn::trainproto {
namespace {

Image8 numbered_image(std::size_t w, std::size_t h) {
  Image8 img(w, h, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 7);
  return img;
}

// Plateaued validation from epoch 2 onwards.
std::vector<ScheduleState> run_plateau(double lr, std::size_t epochs) {
  std::vector<ScheduleState> states{initial_schedule(lr)};
  for (std::size_t e = 0; e < epochs; ++e) states.push_back(schedule_step(states.back(), 0.5));
  return states;
}

TEST(ScheduleTest, StackedDecaySequence) {
  const auto states = run_plateau(kStackedLearningRate, 1 + 8 + 10 + 12);
  // Epoch 1 improves on -inf; then 8, 10 and 12 flat epochs trigger decays.
  EXPECT_DOUBLE_EQ(states[1].learning_rate, 0.005);
  EXPECT_DOUBLE_EQ(states[8].learning_rate, 0.005);
  EXPECT_NEAR(states[9].learning_rate, 0.001, 1e-15);
  EXPECT_EQ(states[9].patience, 10u);
  EXPECT_NEAR(states[18].learning_rate, 0.001, 1e-15);
  EXPECT_NEAR(states[19].learning_rate, 0.0002, 1e-16);
  EXPECT_EQ(states[19].patience, 12u);
  EXPECT_NEAR(states[31].learning_rate, 0.00004, 1e-17);
  EXPECT_EQ(states[31].patience, 15u);
}

TEST(ScheduleTest, StrictImprovementResetsCounter) {
  ScheduleState s = initial_schedule(0.05);
  s = schedule_step(s, 0.6);
  s = schedule_step(s, 0.6);
  EXPECT_EQ(s.epochs_since_improvement, 1u);
  s = schedule_step(s, 0.61);
  EXPECT_EQ(s.epochs_since_improvement, 0u);
  EXPECT_DOUBLE_EQ(s.best_validation_accuracy, 0.61);
}

TEST(ScheduleTest, PatienceGrowthRoundsUp) {
  EXPECT_EQ(grow_patience(8), 10u);
  EXPECT_EQ(grow_patience(10), 12u);
  EXPECT_EQ(grow_patience(12), 15u);
  EXPECT_EQ(grow_patience(5), 6u);
  for (std::size_t p = 1; p < 200; ++p) {
    const std::size_t g = grow_patience(p);
    EXPECT_GE(5 * g, 6 * p);
    EXPECT_LT(5 * (g - 1), 6 * p);
  }
}

TEST(PreprocessTest, PlanarMeanSubtraction) {
  Image8 img(2, 1, 3);
  img.at(0, 0, 0) = 255;
  img.at(0, 0, 1) = 0;
  img.at(0, 0, 2) = 51;
  img.at(1, 0, 0) = 102;
  const MeanRgb mean{0.5, 0.25, 0.0};
  const auto t = preprocess(img, mean);
  ASSERT_EQ(t.shape(), (nn::Shape{1, 3, 1, 2}));
  EXPECT_FLOAT_EQ(t.at(0, 0, 0, 0), 0.5f);
  EXPECT_FLOAT_EQ(t.at(0, 1, 0, 0), -0.25f);
  EXPECT_FLOAT_EQ(t.at(0, 2, 0, 0), 0.2f);
  EXPECT_FLOAT_EQ(t.at(0, 0, 0, 1), -0.1f);
}

TEST(PreprocessTest, MeanIsExactAndJsonStable) {
  Image8 a(1, 1, 3), b(1, 1, 3);
  a.pixels = {255, 0, 10};
  b.pixels = {0, 0, 20};
  const std::vector<const Image8*> images{&a, &b};
  const MeanRgb mean = compute_mean_rgb(images);
  EXPECT_DOUBLE_EQ(mean[0], 0.5);
  EXPECT_DOUBLE_EQ(mean[1], 0.0);
  EXPECT_DOUBLE_EQ(mean[2], 15.0 / 255.0);
  EXPECT_EQ(mean_from_json(mean_to_json(mean)), mean);
}

TEST(AugmentTest, RotationIsCounterClockwise) {
  Image8 img(3, 2, 1);
  img.at(2, 0) = 9;  // top-right
  const Image8 r = rotate90(img, 1);
  EXPECT_EQ(r.width, 2u);
  EXPECT_EQ(r.height, 3u);
  EXPECT_EQ(r.at(0, 0), 9);  // now top-left
}

TEST(AugmentTest, GroupIdentities) {
  const Image8 img = numbered_image(5, 4);
  EXPECT_EQ(rotate90(img, 4), img);
  EXPECT_EQ(rotate90(rotate90(img, 1), 3), img);
  EXPECT_EQ(rotate90(img, -1), rotate90(img, 3));
  EXPECT_EQ(flip_horizontal(flip_horizontal(img)), img);
  EXPECT_EQ(flip_vertical(flip_vertical(img)), img);
  EXPECT_EQ(flip_vertical(flip_horizontal(img)), rotate90(img, 2));
}

TEST(AugmentTest, HsvRoundTripAndNeutralJitter) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double r = uniform01(rng), g = uniform01(rng), b = uniform01(rng);
    double h, s, v, r2, g2, b2;
    rgb_to_hsv(r, g, b, h, s, v);
    EXPECT_GE(h, 0.0);
    EXPECT_LT(h, 1.0);
    hsv_to_rgb(h, s, v, r2, g2, b2);
    EXPECT_NEAR(r, r2, 1e-12);
    EXPECT_NEAR(g, g2, 1e-12);
    EXPECT_NEAR(b, b2, 1e-12);
  }
  const Image8 img = numbered_image(8, 8);
  EXPECT_EQ(jitter_hsv(img, 0.0, 1.0), img);
  // A full hue turn maps back to the same colours up to byte rounding.
  const Image8 turned = jitter_hsv(img, 1.0, 1.0);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    EXPECT_LE(std::abs(int(turned.pixels[i]) - int(img.pixels[i])), 1);
  }
}

TEST(AugmentTest, DrawnParametersInRange) {
  Rng rng(2);
  std::array<int, 4> turns{};
  for (int i = 0; i < 4000; ++i) {
    const AugmentParams p = draw_augment(rng);
    ASSERT_GE(p.quarter_turns, 0);
    ASSERT_LT(p.quarter_turns, 4);
    ++turns[p.quarter_turns];
    EXPECT_LE(std::abs(p.hue_shift), kHueJitter);
    EXPECT_GE(p.saturation_scale, kSaturationLow);
    EXPECT_LE(p.saturation_scale, kSaturationHigh);
  }
  for (int t : turns) EXPECT_NEAR(t, 1000, 150);
}

Slide make_slide(const std::string& id, std::size_t w, std::size_t h,
                 const std::vector<std::uint8_t>& mask, int label) {
  Slide s;
  s.record.id = id;
  s.record.label = label;
  s.image = numbered_image(w, h);
  s.mask = Image8(w, h, 1);
  s.mask.pixels = mask;
  return s;
}

// 4x2 slide: benign at (0,0),(1,0); DCIS at (2,0); IDC at (0..3,1).
PatchSampler tiny_sampler() {
  std::vector<Slide> slides;
  slides.push_back(make_slide("a", 4, 2, {1, 1, 2, 0, 3, 3, 3, 3}, 2));
  slides.push_back(make_slide("b", 2, 2, {1, 0, 0, 1}, 0));
  return PatchSampler(std::move(slides));
}

TEST(SamplerTest, PoolSizesAndRegions) {
  PatchSampler sampler = tiny_sampler();
  EXPECT_EQ(sampler.pool_size(0), 4u);
  EXPECT_EQ(sampler.pool_size(1), 1u);
  EXPECT_EQ(sampler.pool_size(2), 4u);
  sampler.add_benign_regions({{1, 0, 0, 2, 2}});
  EXPECT_EQ(sampler.pool_size(0), 8u);
}

TEST(SamplerTest, CentresAreUniformOverThePool) {
  PatchSampler sampler = tiny_sampler();
  sampler.add_benign_regions({{0, 2, 0, 4, 1}});  // two pixels, one already DCIS
  Rng rng(3);
  std::map<std::tuple<std::size_t, long, long>, int> counts;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    const PatchCenter c = sampler.draw_center(0, rng);
    EXPECT_EQ(c.label, 0);
    ++counts[{c.slide, c.x, c.y}];
  }
  // Pool: 4 annotated benign pixels plus 2 region pixels, all distinct.
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [key, n] : counts) EXPECT_NEAR(n, draws / 6.0, 0.05 * draws / 6.0);
  for (int i = 0; i < 100; ++i) {
    const PatchCenter c = sampler.draw_center(1, rng);
    EXPECT_EQ(c.slide, 0u);
    EXPECT_EQ(c.x, 2);
    EXPECT_EQ(c.y, 0);
  }
}

TEST(SamplerTest, EmptyPoolRejected) {
  std::vector<Slide> slides;
  slides.push_back(make_slide("a", 2, 1, {1, 1}, 0));
  PatchSampler sampler(std::move(slides));
  Rng rng(4);
  EXPECT_THROW(sampler.draw_center(2, rng), ContractError);
}

TEST(SamplerTest, ExtractMirrorsAtBorders) {
  const PatchSampler sampler = tiny_sampler();
  const Image8 patch = sampler.extract({0, 0, 0, 0}, 3);
  ASSERT_EQ(patch.width, 3u);
  const Image8& img = sampler.slides()[0].image;
  // Centre pixel is the requested one.
  EXPECT_EQ(patch.at(1, 1, 0), img.at(0, 0, 0));
}

TEST(SamplerTest, RegionsJsonRoundTrip) {
  const std::vector<Region> regions{{0, 1, 2, 3, 4}, {1, 0, 0, 5, 5}};
  const std::vector<std::string> ids{"a", "b"};
  const auto j = regions_to_json(regions, ids);
  EXPECT_EQ(regions_from_json(j, ids), regions);
  const auto only_b = regions_from_json(j, {"b"});
  ASSERT_EQ(only_b.size(), 1u);
  EXPECT_EQ(only_b[0].slide, 0u);
}

TEST(MiningTest, OneRegionPerFalsePositiveComponent) {
  cascnn::ProbabilityMap map;
  map.rows = 3;
  map.cols = 4;
  map.window = 224;
  map.stride = 100;
  map.tissue.assign(12, 1);
  map.probabilities.assign(12 * 3, 0.0f);
  auto set = [&](std::size_t r, std::size_t c, int k) {
    float* p = &map.probabilities[(r * 4 + c) * 3];
    p[0] = p[1] = p[2] = 0.0f;
    p[k] = 1.0f;
  };
  for (std::size_t i = 0; i < 12; ++i) set(i / 4, i % 4, 0);
  set(0, 0, 1);
  set(1, 1, 2);  // diagonal neighbour: same component
  set(0, 3, 2);
  set(2, 3, 1);
  map.tissue[2 * 4 + 3] = 0;  // background cell ignored
  const auto regions = false_positive_regions(map, 7);
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(regions[0], (Region{7, 0, 0, 100 + 224, 100 + 224}));
  EXPECT_EQ(regions[1], (Region{7, 300, 0, 300 + 224, 224}));
}

TEST(TrainerTest, DefaultBatchSizes) {
  EXPECT_EQ(default_batch_size(224, false), 22u);
  EXPECT_EQ(default_batch_size(512, true), 18u);
  EXPECT_EQ(default_batch_size(768, true), 18u);
  EXPECT_EQ(default_batch_size(1024, true), 10u);
}

TEST(TrainerTest, ConfigJsonRoundTripAndDefaults) {
  TrainConfig c;
  c.batch_size = 7;
  c.initial_lr = 0.005;
  c.seed = 99;
  const TrainConfig back = train_config_from_json(to_json(c));
  EXPECT_EQ(back.batch_size, 7u);
  EXPECT_DOUBLE_EQ(back.initial_lr, 0.005);
  EXPECT_EQ(back.seed, 99u);
  const TrainConfig partial = train_config_from_json({{"max_epochs", 3}}, c);
  EXPECT_EQ(partial.max_epochs, 3u);
  EXPECT_EQ(partial.batch_size, 7u);
  EXPECT_ANY_THROW(train_config_from_json({{"batch_size", 0}}));
}

TEST(TrainerTest, LogCsvLayout) {
  TrainLog log;
  log.epochs.push_back({1, 0.5, 0.75, 0.05, 8});
  std::ostringstream out;
  write_training_log_csv(out, log);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,loss,accuracy,learning_rate,patience");
}

TEST(DatasetTest, IndexRoundTripAndSlideValidation) {
  const auto dir = std::filesystem::temp_directory_path() / "casnn_dataset_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  DatasetIndex index;
  index.root = dir.string();
  index.pixel_spacing_um = 0.5;
  index.slides.push_back({"s0", "s0.png", "s0_mask.png", Split::kTrain, 1});
  index.slides.push_back({"s1", "s1.png", "s1_mask.png", Split::kTest, 2});
  save_dataset_index(dir.string(), index);
  const DatasetIndex back = load_dataset_index(dir.string());
  EXPECT_EQ(back.slides, index.slides);
  EXPECT_DOUBLE_EQ(back.pixel_spacing_um, 0.5);
  EXPECT_EQ(back.with_split(Split::kTest).size(), 1u);

  write_png((dir / "s0.png").string(), numbered_image(4, 3));
  Image8 mask(4, 3, 1, 1);
  write_png((dir / "s0_mask.png").string(), mask);
  EXPECT_NO_THROW(load_slide(back, back.slides[0]));
  mask.pixels[5] = 4;
  write_png((dir / "s0_mask.png").string(), mask);
  EXPECT_THROW(load_slide(back, back.slides[0]), DataError);
  write_png((dir / "s0_mask.png").string(), Image8(3, 3, 1, 1));
  EXPECT_THROW(load_slide(back, back.slides[0]), DataError);
  std::filesystem::remove_all(dir);
}

TEST(DatasetTest, ClassNames) {
  EXPECT_EQ(class_from_name("benign"), 0);
  EXPECT_EQ(class_from_name("idc"), 2);
  EXPECT_ANY_THROW(class_from_name("lobular"));
  EXPECT_EQ(split_from_string(to_string(Split::kVal)), Split::kVal);
}

}  // namespace
}  // namespace casnn::trainproto
