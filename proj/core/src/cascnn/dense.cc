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

#include "casnn/cascnn/dense.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "casnn/common/error.h"
#include "casnn/common/parallel.h"
#include "casnn/nn/weights_io.h"

namespace casnn::cascnn {

std::size_t grid_extent(std::size_t extent, std::size_t window, std::size_t stride) {
  if (stride == 0) throw ContractError("dense prediction stride must be positive");
  if (extent < window) {
    throw ContractError("image extent " + std::to_string(extent) + " is smaller than window " +
                        std::to_string(window));
  }
  return (extent - window) / stride + 1;
}

std::vector<std::uint8_t> tissue_pixels(const Image8& rgb) {
  if (rgb.channels != 3) throw ContractError("tissue mask needs an RGB image");
  std::vector<std::uint8_t> mask(rgb.width * rgb.height, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const std::uint8_t* p = &rgb.pixels[i * 3];
    mask[i] = (p[0] < kWhiteLevel || p[1] < kWhiteLevel || p[2] < kWhiteLevel) ? 1 : 0;
  }
  return mask;
}

std::vector<std::uint8_t> cell_tissue_flags(const std::vector<std::uint8_t>& pixels,
                                            std::size_t width, std::size_t height,
                                            std::size_t window, std::size_t stride,
                                            double min_fraction) {
  if (pixels.size() != width * height) throw ContractError("tissue mask size mismatch");
  const std::size_t rows = grid_extent(height, window, stride);
  const std::size_t cols = grid_extent(width, window, stride);
  // Integral image for O(1) footprint sums.
  std::vector<std::uint64_t> integral((width + 1) * (height + 1), 0);
  for (std::size_t y = 0; y < height; ++y) {
    std::uint64_t row = 0;
    for (std::size_t x = 0; x < width; ++x) {
      row += pixels[y * width + x];
      integral[(y + 1) * (width + 1) + x + 1] = integral[y * (width + 1) + x + 1] + row;
    }
  }
  auto footprint = [&](std::size_t origin, std::size_t extent, std::size_t& lo,
                       std::size_t& hi) {
    const long centre = static_cast<long>(origin + window / 2);
    const long a = std::max(0L, centre - static_cast<long>(stride / 2));
    const long b = std::min(static_cast<long>(extent), a + static_cast<long>(stride));
    lo = static_cast<std::size_t>(a);
    hi = static_cast<std::size_t>(b);
  };
  std::vector<std::uint8_t> flags(rows * cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t y0, y1;
    footprint(r * stride, height, y0, y1);
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t x0, x1;
      footprint(c * stride, width, x0, x1);
      const std::uint64_t sum = integral[y1 * (width + 1) + x1] - integral[y0 * (width + 1) + x1] -
                                integral[y1 * (width + 1) + x0] + integral[y0 * (width + 1) + x0];
      const double area = static_cast<double>((y1 - y0) * (x1 - x0));
      flags[r * cols + c] = area > 0 && static_cast<double>(sum) >= min_fraction * area ? 1 : 0;
    }
  }
  return flags;
}

nn::Tensor<float> crop_window(const nn::Tensor<float>& image, std::size_t y0, std::size_t x0,
                              std::size_t size) {
  const nn::Shape& s = image.shape();
  if (s.n != 1 || y0 + size > s.h || x0 + size > s.w) {
    throw ContractError("crop_window: window at (" + std::to_string(x0) + "," +
                        std::to_string(y0) + ") of size " + std::to_string(size) +
                        " exceeds image " + s.to_string());
  }
  nn::Tensor<float> out(nn::Shape{1, s.c, size, size});
  for (std::size_t c = 0; c < s.c; ++c) {
    for (std::size_t y = 0; y < size; ++y) {
      const float* src = &image.at(0, c, y0 + y, x0);
      std::memcpy(&out.at(0, c, y, 0), src, size * sizeof(float));
    }
  }
  return out;
}

ProbabilityMap dense_predict(const WindowClassifier& classify, const nn::Tensor<float>& image,
                             std::size_t window, std::size_t stride, const DenseOptions& options) {
  const nn::Shape& s = image.shape();
  if (s.n != 1) throw ContractError("dense_predict expects a single image");
  ProbabilityMap map;
  map.rows = grid_extent(s.h, window, stride);
  map.cols = grid_extent(s.w, window, stride);
  map.window = window;
  map.stride = stride;
  map.pixel_spacing_um = options.pixel_spacing_um;
  const std::size_t cells = map.rows * map.cols;
  if (options.tissue.empty()) {
    map.tissue.assign(cells, 1);
  } else {
    if (options.tissue.size() != cells) {
      throw ContractError("tissue flags cover " + std::to_string(options.tissue.size()) +
                          " cells, grid has " + std::to_string(cells));
    }
    map.tissue = options.tissue;
  }
  map.probabilities.assign(cells * kClasses, 0.0f);
  parallel_for(cells, options.threads, [&](std::size_t cell) {
    float* dst = &map.probabilities[cell * kClasses];
    if (options.skip_background && !map.tissue[cell]) {
      dst[0] = 1.0f;
      return;
    }
    const std::size_t r = cell / map.cols;
    const std::size_t c = cell % map.cols;
    const nn::Tensor<float> probs = classify(crop_window(image, r * stride, c * stride, window));
    if (probs.size() != kClasses) {
      throw ContractError("window classifier returned " + std::to_string(probs.size()) +
                          " values, expected " + std::to_string(kClasses));
    }
    std::copy(probs.data(), probs.data() + kClasses, dst);
  });
  return map;
}

ProbabilityMap dense_predict(const StackedNetwork<float>& stacked, const nn::Tensor<float>& image,
                             const StackedConfig& config, const DenseOptions& options) {
  if (config.training_patch_size != stacked.config().training_patch_size) {
    throw ContractError("dense_predict window differs from the stacked network's patch size");
  }
  auto classify = [&](const nn::Tensor<float>& w) { return predict_window(stacked, w); };
  return dense_predict(classify, image, config.training_patch_size, config.window_stride,
                       options);
}

std::string encode_probability_map(const ProbabilityMap& map) {
  const std::size_t cells = map.rows * map.cols;
  if (map.probabilities.size() != cells * kClasses || map.tissue.size() != cells) {
    throw ContractError("probability map buffers do not match its grid");
  }
  std::string flags(cells, '0');
  for (std::size_t i = 0; i < cells; ++i) flags[i] = map.tissue[i] ? '1' : '0';
  const nlohmann::json header = {{"format", "casnn-probmap"},
                                 {"version", 1},
                                 {"rows", map.rows},
                                 {"cols", map.cols},
                                 {"window", map.window},
                                 {"stride", map.stride},
                                 {"origin", {map.origin_x, map.origin_y}},
                                 {"pixel_spacing_um", map.pixel_spacing_um},
                                 {"tissue", flags}};
  std::string out = header.dump();
  out.push_back('\n');
  const std::size_t offset = out.size();
  out.resize(offset + map.probabilities.size() * 4);
  for (std::size_t i = 0; i < map.probabilities.size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(map.probabilities[i]);
    for (int b = 0; b < 4; ++b) {
      out[offset + i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
  }
  return out;
}

ProbabilityMap decode_probability_map(const std::string& bytes) {
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string::npos) throw DataError("probability map: missing header line");
  ProbabilityMap map;
  std::string flags;
  try {
    const nlohmann::json h = nlohmann::json::parse(bytes.substr(0, nl));
    if (h.at("format").get<std::string>() != "casnn-probmap") {
      throw DataError("probability map: unexpected format tag");
    }
    map.rows = h.at("rows").get<std::size_t>();
    map.cols = h.at("cols").get<std::size_t>();
    map.window = h.at("window").get<std::size_t>();
    map.stride = h.at("stride").get<std::size_t>();
    map.origin_x = h.at("origin").at(0).get<std::size_t>();
    map.origin_y = h.at("origin").at(1).get<std::size_t>();
    map.pixel_spacing_um = h.at("pixel_spacing_um").get<double>();
    flags = h.at("tissue").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("probability map: malformed header: ") + e.what());
  }
  const std::size_t cells = map.rows * map.cols;
  if (flags.size() != cells) throw DataError("probability map: tissue flag count mismatch");
  map.tissue.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    if (flags[i] != '0' && flags[i] != '1') throw DataError("probability map: bad tissue flag");
    map.tissue[i] = flags[i] == '1' ? 1 : 0;
  }
  const std::size_t payload = bytes.size() - nl - 1;
  if (payload != cells * kClasses * 4) {
    throw DataError("probability map: payload has " + std::to_string(payload) +
                    " bytes, expected " + std::to_string(cells * kClasses * 4));
  }
  map.probabilities.resize(cells * kClasses);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + nl + 1);
  for (std::size_t i = 0; i < map.probabilities.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[i * 4 + b]) << (8 * b);
    map.probabilities[i] = std::bit_cast<float>(bits);
  }
  return map;
}

void save_probability_map(const std::string& path, const ProbabilityMap& map) {
  nn::write_file_bytes(path, encode_probability_map(map));
}

ProbabilityMap load_probability_map(const std::string& path) {
  return decode_probability_map(nn::read_file_bytes(path));
}

Image8 render_heatmap(const ProbabilityMap& map) {
  static constexpr std::uint8_t kColours[kClasses][3] = {{0, 160, 0}, {0, 0, 255}, {255, 0, 0}};
  Image8 out(map.cols, map.rows, 3, 0);
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      if (!map.tissue[r * map.cols + c]) continue;
      std::size_t best = 0;
      for (std::size_t k = 1; k < kClasses; ++k) {
        if (map.at(r, c, k) > map.at(r, c, best)) best = k;
      }
      for (int ch = 0; ch < 3; ++ch) out.at(c, r, ch) = kColours[best][ch];
    }
  }
  return out;
}

}  // namespace casnn::cascnn
