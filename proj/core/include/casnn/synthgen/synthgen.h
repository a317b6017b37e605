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

#ifndef CASNN_SYNTHGEN_SYNTHGEN_H_
#define CASNN_SYNTHGEN_SYNTHGEN_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "casnn/common/image.h"
#include "casnn/trainproto/dataset.h"

namespace casnn::synthgen {

using Rgb = std::array<std::uint8_t, 3>;

// Nuclei stamped onto one class region.
struct ClassTexture {
  double nucleus_radius_min = 2.0;
  double nucleus_radius_max = 4.0;
  double nuclei_per_kpx = 0.5;  // per 1000 px of region
  Rgb ground{235, 175, 205};
  Rgb nucleus{95, 45, 130};
};

struct SynthConfig {
  std::size_t image_size = 1536;
  std::size_t slides_per_class = 40;
  double test_fraction = 0.25;
  double val_fraction = 0.0;
  std::uint64_t seed = 0;
  double pixel_spacing_um = 1.0;
  // Lesion pixels as a fraction of tissue pixels on slides of that label.
  double dcis_fraction = 0.06;
  double idc_fraction = 0.15;
  // Probability that an IDC slide also carries ducts (at half dcis_fraction).
  double idc_with_dcis = 0.5;
  double duct_radius_min = 35.0;
  double duct_radius_max = 75.0;
  double duct_rim_width = 7.0;
  double mass_disc_radius_min = 50.0;
  double mass_disc_radius_max = 110.0;
  ClassTexture benign{2.0, 4.0, 0.5, {235, 175, 205}, {95, 45, 130}};
  ClassTexture dcis{3.0, 6.0, 6.0, {190, 120, 185}, {90, 40, 125}};
  ClassTexture idc{3.0, 6.0, 7.0, {180, 110, 175}, {90, 40, 125}};
  std::size_t threads = 1;
};

nlohmann::json to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig defaults = {});

struct SyntheticSlide {
  Image8 image;  // RGB
  Image8 mask;   // 0 background, 1 benign, 2 DCIS, 3 IDC
  int label = 0; // worst class present
};

// Deterministic in (config, label, seed).
SyntheticSlide generate_slide(const SynthConfig& config, int label, std::uint64_t seed);

// Writes images/, masks/ and the dataset index under `out_dir`. Slide i of
// the combined list uses derive_seed(seed, i); splits are drawn per class
// from derive_seed(seed, "split").
trainproto::DatasetIndex generate(const SynthConfig& config, const std::string& out_dir);

}  // namespace casnn::synthgen

#endif  // CASNN_SYNTHGEN_SYNTHGEN_H_
