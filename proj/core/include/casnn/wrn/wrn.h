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

#ifndef CASNN_WRN_WRN_H_
#define CASNN_WRN_WRN_H_

#include <array>
#include <cstddef>

#include <nlohmann/json.hpp>

#include "casnn/nn/network.h"

namespace casnn::wrn {

// Wide residual network hyperparameters: N blocks per group, width
// multiplier K. Group widths are base_widths * K.
struct WrnConfig {
  std::size_t n_blocks_per_group = 4;
  std::size_t width_multiplier = 2;
  std::size_t num_classes = 3;
  std::array<std::size_t, 3> base_widths{16, 32, 64};
  std::size_t initial_width = 32;
  std::size_t input_channels = 3;
  std::size_t input_size = 224;  // training patch size; the graph is fully convolutional

  std::size_t group_width(std::size_t g) const { return base_widths.at(g) * width_multiplier; }
  std::size_t feature_channels() const { return group_width(2); }
  bool operator==(const WrnConfig&) const = default;
};

inline constexpr std::size_t kDownsampling = 16;
inline constexpr std::size_t kMinFeatureInput = 224;

nlohmann::json to_json(const WrnConfig& config);
WrnConfig wrn_config_from_json(const nlohmann::json& j);

// initial 3x3 conv (stride 2) -> 3 groups of N pre-activation blocks (first
// block of each group strided, with a 1x1 projection skip) -> BN -> ReLU ->
// global average pooling -> 1x1 softmax classifier.
template <typename T>
nn::Network<T> build_wrn(const WrnConfig& config);

// Number of leading layers that make up the feature extractor (everything up
// to and including the last residual block).
std::size_t feature_layer_count(const WrnConfig& config);

// Last-conv-layer activations, (n, 4K*16, s/16, s/16) for an s x s input. The
// classifier head is not evaluated.
template <typename T>
nn::Tensor<T> extract_features(const nn::Network<T>& wrn, const WrnConfig& config,
                               const nn::Tensor<T>& input);

// Throws ContractError unless the input is at least 224 and divisible by 16.
void check_feature_input(std::size_t height, std::size_t width);

}  // namespace casnn::wrn

#endif  // CASNN_WRN_WRN_H_
