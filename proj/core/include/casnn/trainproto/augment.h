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

#ifndef CASNN_TRAINPROTO_AUGMENT_H_
#define CASNN_TRAINPROTO_AUGMENT_H_

#include "casnn/common/image.h"
#include "casnn/common/rng.h"

namespace casnn::trainproto {

inline constexpr double kHueJitter = 0.05;
inline constexpr double kSaturationLow = 0.9;
inline constexpr double kSaturationHigh = 1.1;

struct AugmentParams {
  int quarter_turns = 0;  // counter-clockwise, 0..3
  bool flip_horizontal = false;
  bool flip_vertical = false;
  double hue_shift = 0.0;         // added to hue in [0, 1), wrapping
  double saturation_scale = 1.0;  // result clamped to [0, 1]
};

AugmentParams draw_augment(Rng& rng);

Image8 rotate90(const Image8& image, int quarter_turns);
Image8 flip_horizontal(const Image8& image);
Image8 flip_vertical(const Image8& image);

// h in [0, 1), s and v in [0, 1]; inputs in [0, 1].
void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v);
void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b);

Image8 jitter_hsv(const Image8& rgb, double hue_shift, double saturation_scale);

// Rotation, then flips, then colour jitter.
Image8 augment(const Image8& rgb, const AugmentParams& params);

}  // namespace casnn::trainproto

#endif  // CASNN_TRAINPROTO_AUGMENT_H_
