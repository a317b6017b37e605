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

#include <algorithm>
#include <string>

#include "casnn/common/error.h"
#include "casnn/common/image.h"

namespace casnn {

std::size_t mirror_index(long i, std::size_t n) {
  const long len = static_cast<long>(n);
  if (len == 1) return 0;
  const long period = 2 * len;
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < len ? m : period - 1 - m);
}

Image8 crop_mirrored(const Image8& image, long cx, long cy, std::size_t size) {
  if (image.empty()) throw ContractError("crop_mirrored on an empty image");
  Image8 out(size, size, image.channels);
  const long x0 = cx - static_cast<long>(size / 2);
  const long y0 = cy - static_cast<long>(size / 2);
  const std::size_t ch = image.channels;
  for (std::size_t y = 0; y < size; ++y) {
    const std::size_t sy = mirror_index(y0 + static_cast<long>(y), image.height);
    const std::uint8_t* src_row = image.pixels.data() + sy * image.width * ch;
    std::uint8_t* dst = out.pixels.data() + y * size * ch;
    const long first = x0;
    if (first >= 0 && first + static_cast<long>(size) <= static_cast<long>(image.width)) {
      std::copy_n(src_row + static_cast<std::size_t>(first) * ch, size * ch, dst);
      continue;
    }
    for (std::size_t x = 0; x < size; ++x) {
      const std::size_t sx = mirror_index(first + static_cast<long>(x), image.width);
      std::copy_n(src_row + sx * ch, ch, dst + x * ch);
    }
  }
  return out;
}

Image8 crop(const Image8& image, std::size_t x0, std::size_t y0, std::size_t w,
            std::size_t h) {
  if (x0 + w > image.width || y0 + h > image.height) {
    throw ContractError("crop rectangle exceeds image bounds");
  }
  Image8 out(w, h, image.channels);
  for (std::size_t y = 0; y < h; ++y) {
    std::copy_n(image.pixels.data() + ((y0 + y) * image.width + x0) * image.channels,
                w * image.channels, out.pixels.data() + y * w * image.channels);
  }
  return out;
}

}  // namespace casnn
