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

#ifndef CASNN_COMMON_IMAGE_H_
#define CASNN_COMMON_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace casnn {

// Interleaved 8-bit raster (row-major, channels innermost).
struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> pixels;

  Image8() = default;
  Image8(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t ch = 0) {
    return pixels[(y * width + x) * channels + ch];
  }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t ch = 0) const {
    return pixels[(y * width + x) * channels + ch];
  }
  bool empty() const { return pixels.empty(); }
  bool operator==(const Image8&) const = default;
};

// PNG I/O through libpng. Gray (1 channel) and RGB (3 channels) only.
Image8 read_png(const std::string& path);
void write_png(const std::string& path, const Image8& image);

// Copies a size x size crop centred on (cx, cy); out-of-range source indices
// are mirrored ("reflect": -1 -> 0, -2 -> 1, w -> w-1).
Image8 crop_mirrored(const Image8& image, long cx, long cy, std::size_t size);

// Axis-aligned crop; the rectangle must lie inside the image.
Image8 crop(const Image8& image, std::size_t x0, std::size_t y0, std::size_t w,
            std::size_t h);

std::size_t mirror_index(long i, std::size_t n);

}  // namespace casnn

#endif  // CASNN_COMMON_IMAGE_H_
