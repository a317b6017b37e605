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

#include "casnn/trainproto/augment.h"

#include <algorithm>
#include <cmath>

#include "casnn/common/error.h"

namespace casnn::trainproto {

AugmentParams draw_augment(Rng& rng) {
  AugmentParams p;
  p.quarter_turns = static_cast<int>(uniform_index(rng, 4));
  p.flip_horizontal = uniform01(rng) < 0.5;
  p.flip_vertical = uniform01(rng) < 0.5;
  p.hue_shift = uniform(rng, -kHueJitter, kHueJitter);
  p.saturation_scale = uniform(rng, kSaturationLow, kSaturationHigh);
  return p;
}

Image8 rotate90(const Image8& image, int quarter_turns) {
  const int turns = ((quarter_turns % 4) + 4) % 4;
  Image8 cur = image;
  for (int t = 0; t < turns; ++t) {
    // Counter-clockwise: (x, y) -> (y, w - 1 - x).
    Image8 next(cur.height, cur.width, cur.channels);
    for (std::size_t y = 0; y < cur.height; ++y) {
      for (std::size_t x = 0; x < cur.width; ++x) {
        for (std::size_t c = 0; c < cur.channels; ++c) {
          next.at(y, cur.width - 1 - x, c) = cur.at(x, y, c);
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

Image8 flip_horizontal(const Image8& image) {
  Image8 out(image.width, image.height, image.channels);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < image.channels; ++c) {
        out.at(image.width - 1 - x, y, c) = image.at(x, y, c);
      }
    }
  }
  return out;
}

Image8 flip_vertical(const Image8& image) {
  Image8 out(image.width, image.height, image.channels);
  const std::size_t row = image.width * image.channels;
  for (std::size_t y = 0; y < image.height; ++y) {
    std::copy_n(&image.pixels[y * row], row, &out.pixels[(image.height - 1 - y) * row]);
  }
  return out;
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  v = mx;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) {
    h = 0.0;
    return;
  }
  double sector;
  if (mx == r) {
    sector = (g - b) / delta;
  } else if (mx == g) {
    sector = (b - r) / delta + 2.0;
  } else {
    sector = (r - g) / delta + 4.0;
  }
  h = sector / 6.0;
  if (h < 0.0) h += 1.0;
  if (h >= 1.0) h -= 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double h6 = (h - std::floor(h)) * 6.0;
  const double sector = std::floor(h6);
  const double f = h6 - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (static_cast<int>(sector) % 6) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

Image8 jitter_hsv(const Image8& rgb, double hue_shift, double saturation_scale) {
  if (rgb.channels != 3) throw ContractError("colour jitter needs an RGB image");
  Image8 out = rgb;
  if (hue_shift == 0.0 && saturation_scale == 1.0) return out;
  auto to_byte = [](double x) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(x * 255.0), 0L, 255L));
  };
  for (std::size_t i = 0; i < rgb.width * rgb.height; ++i) {
    const std::uint8_t* p = &rgb.pixels[i * 3];
    double h, s, v;
    rgb_to_hsv(p[0] / 255.0, p[1] / 255.0, p[2] / 255.0, h, s, v);
    h += hue_shift;
    h -= std::floor(h);
    s = std::clamp(s * saturation_scale, 0.0, 1.0);
    double r, g, b;
    hsv_to_rgb(h, s, v, r, g, b);
    out.pixels[i * 3 + 0] = to_byte(r);
    out.pixels[i * 3 + 1] = to_byte(g);
    out.pixels[i * 3 + 2] = to_byte(b);
  }
  return out;
}

Image8 augment(const Image8& rgb, const AugmentParams& params) {
  Image8 out = rotate90(rgb, params.quarter_turns);
  if (params.flip_horizontal) out = flip_horizontal(out);
  if (params.flip_vertical) out = flip_vertical(out);
  return jitter_hsv(out, params.hue_shift, params.saturation_scale);
}

}  // namespace casnn::trainproto
