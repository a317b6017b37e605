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

#ifndef CASNN_CASCNN_DENSE_H_
#define CASNN_CASCNN_DENSE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "casnn/cascnn/stacked.h"
#include "casnn/common/image.h"
#include "casnn/nn/tensor.h"

namespace casnn::cascnn {

inline constexpr std::size_t kClasses = 3;

// Coarse grid of class probabilities. Cell (r, c) holds the prediction for the
// window whose top-left pixel is origin + (c * stride, r * stride).
struct ProbabilityMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t window = 0;
  std::size_t stride = 0;
  std::size_t origin_x = 0;
  std::size_t origin_y = 0;
  double pixel_spacing_um = 1.0;
  std::vector<float> probabilities;  // rows * cols * 3, row-major
  std::vector<std::uint8_t> tissue;  // rows * cols, 1 = tissue cell

  float at(std::size_t r, std::size_t c, std::size_t k) const {
    return probabilities[(r * cols + c) * kClasses + k];
  }
  double cell_spacing_um() const { return static_cast<double>(stride) * pixel_spacing_um; }
  bool operator==(const ProbabilityMap&) const = default;
};

// floor((extent - window) / stride) + 1; ContractError if extent < window.
std::size_t grid_extent(std::size_t extent, std::size_t window, std::size_t stride);

// Pixels are tissue unless near-white (every channel >= kWhiteLevel).
inline constexpr std::uint8_t kWhiteLevel = 215;
std::vector<std::uint8_t> tissue_pixels(const Image8& rgb);

// A cell is tissue when at least `min_fraction` of the stride x stride
// footprint centred in its window is tissue.
inline constexpr double kCellTissueFraction = 0.25;
std::vector<std::uint8_t> cell_tissue_flags(const std::vector<std::uint8_t>& pixels,
                                            std::size_t width, std::size_t height,
                                            std::size_t window, std::size_t stride,
                                            double min_fraction = kCellTissueFraction);

// (1, c, size, size) copy of image[:, y0:y0+size, x0:x0+size].
nn::Tensor<float> crop_window(const nn::Tensor<float>& image, std::size_t y0, std::size_t x0,
                              std::size_t size);

// Maps a (1, 3, s, s) window to (1, 3, 1, 1) probabilities.
using WindowClassifier = std::function<nn::Tensor<float>(const nn::Tensor<float>&)>;

struct DenseOptions {
  std::size_t threads = 1;
  double pixel_spacing_um = 1.0;
  // Per-cell tissue flags (rows * cols). Empty means every cell is tissue.
  std::vector<std::uint8_t> tissue;
  // When set, non-tissue cells are not evaluated and get probabilities (1, 0, 0).
  bool skip_background = false;
};

// Windows are evaluated independently and written to disjoint cells, so the
// result does not depend on the thread count.
ProbabilityMap dense_predict(const WindowClassifier& classify, const nn::Tensor<float>& image,
                             std::size_t window, std::size_t stride, const DenseOptions& options);

ProbabilityMap dense_predict(const StackedNetwork<float>& stacked, const nn::Tensor<float>& image,
                             const StackedConfig& config, const DenseOptions& options);

// Header line (JSON) + little-endian float32 probabilities.
std::string encode_probability_map(const ProbabilityMap& map);
ProbabilityMap decode_probability_map(const std::string& bytes);
void save_probability_map(const std::string& path, const ProbabilityMap& map);
ProbabilityMap load_probability_map(const std::string& path);

// Argmax colour per cell (benign green, DCIS blue, IDC red, background black),
// one pixel per cell.
Image8 render_heatmap(const ProbabilityMap& map);

}  // namespace casnn::cascnn

#endif  // CASNN_CASCNN_DENSE_H_
