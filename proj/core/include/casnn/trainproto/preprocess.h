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

#ifndef CASNN_TRAINPROTO_PREPROCESS_H_
#define CASNN_TRAINPROTO_PREPROCESS_H_

#include <array>
#include <span>

#include <nlohmann/json.hpp>

#include "casnn/common/image.h"
#include "casnn/nn/tensor.h"

namespace casnn::trainproto {

// Per-channel mean of raw / 255 over a set of RGB images.
using MeanRgb = std::array<double, 3>;

// Exact: channel sums are accumulated in 64-bit integers.
MeanRgb compute_mean_rgb(std::span<const Image8* const> images);

// value = raw / 255 - mean[channel], written planar (c, h, w) to `dst`.
void preprocess_into(const Image8& rgb, const MeanRgb& mean, float* dst);
nn::Tensor<float> preprocess(const Image8& rgb, const MeanRgb& mean);

nlohmann::json mean_to_json(const MeanRgb& mean);
MeanRgb mean_from_json(const nlohmann::json& j);

}  // namespace casnn::trainproto

#endif  // CASNN_TRAINPROTO_PREPROCESS_H_
