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

#include "casnn/trainproto/preprocess.h"

#include <cstdint>
#include <string>

#include "casnn/common/error.h"

namespace casnn::trainproto {

MeanRgb compute_mean_rgb(std::span<const Image8* const> images) {
  std::uint64_t sums[3] = {0, 0, 0};
  std::uint64_t pixels = 0;
  for (const Image8* img : images) {
    if (img->channels != 3) throw ContractError("mean RGB needs RGB images");
    const std::size_t n = img->width * img->height;
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) sums[c] += img->pixels[i * 3 + c];
    }
    pixels += n;
  }
  if (pixels == 0) throw ContractError("mean RGB over an empty image set");
  MeanRgb mean{};
  for (int c = 0; c < 3; ++c) {
    mean[c] = static_cast<double>(sums[c]) / (255.0 * static_cast<double>(pixels));
  }
  return mean;
}

void preprocess_into(const Image8& rgb, const MeanRgb& mean, float* dst) {
  if (rgb.channels != 3) throw ContractError("preprocess needs an RGB image");
  const std::size_t n = rgb.width * rgb.height;
  for (int c = 0; c < 3; ++c) {
    float* plane = dst + static_cast<std::size_t>(c) * n;
    for (std::size_t i = 0; i < n; ++i) {
      plane[i] = static_cast<float>(rgb.pixels[i * 3 + c] / 255.0 - mean[c]);
    }
  }
}

nn::Tensor<float> preprocess(const Image8& rgb, const MeanRgb& mean) {
  nn::Tensor<float> out(nn::Shape{1, 3, rgb.height, rgb.width});
  preprocess_into(rgb, mean, out.data());
  return out;
}

nlohmann::json mean_to_json(const MeanRgb& mean) { return mean; }

MeanRgb mean_from_json(const nlohmann::json& j) {
  try {
    return j.get<MeanRgb>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed mean RGB: ") + e.what());
  }
}

}  // namespace casnn::trainproto
