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

#include "casnn/wrn/wrn.h"

#include <memory>
#include <string>

#include "casnn/common/error.h"
#include "casnn/nn/layers.h"

namespace casnn::wrn {

nlohmann::json to_json(const WrnConfig& config) {
  return {{"n_blocks_per_group", config.n_blocks_per_group},
          {"width_multiplier", config.width_multiplier},
          {"num_classes", config.num_classes},
          {"base_widths", config.base_widths},
          {"initial_width", config.initial_width},
          {"input_channels", config.input_channels},
          {"input_size", config.input_size}};
}

WrnConfig wrn_config_from_json(const nlohmann::json& j) {
  WrnConfig c;
  try {
    c.n_blocks_per_group = j.at("n_blocks_per_group").get<std::size_t>();
    c.width_multiplier = j.at("width_multiplier").get<std::size_t>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.base_widths = j.at("base_widths").get<std::array<std::size_t, 3>>();
    c.initial_width = j.at("initial_width").get<std::size_t>();
    c.input_channels = j.at("input_channels").get<std::size_t>();
    c.input_size = j.at("input_size").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed WRN config: ") + e.what());
  }
  const bool widths_ok = c.base_widths[0] > 0 && c.base_widths[1] > 0 && c.base_widths[2] > 0;
  if (c.n_blocks_per_group < 1 || c.width_multiplier < 1 || c.num_classes < 2 || !widths_ok ||
      c.initial_width < 1 || c.input_channels < 1 || c.input_size < 1) {
    throw DataError("malformed WRN config: non-positive size");
  }
  return c;
}

std::size_t feature_layer_count(const WrnConfig& config) {
  return 1 + 3 * config.n_blocks_per_group;
}

template <typename T>
nn::Network<T> build_wrn(const WrnConfig& config) {
  if (config.n_blocks_per_group < 1 || config.width_multiplier < 1) {
    throw ContractError("build_wrn: N and K must be at least 1");
  }
  if (config.num_classes < 2) throw ContractError("build_wrn: need at least 2 classes");
  nn::Network<T> net(
      nn::Shape{1, config.input_channels, config.input_size, config.input_size});
  net.template emplace<nn::Conv2d<T>>(config.input_channels, config.initial_width, 3, 2);
  std::size_t channels = config.initial_width;
  for (std::size_t g = 0; g < 3; ++g) {
    const std::size_t width = config.group_width(g);
    for (std::size_t b = 0; b < config.n_blocks_per_group; ++b) {
      net.add(nn::make_preact_block<T>(channels, width, b == 0 ? 2 : 1));
      channels = width;
    }
  }
  // Closing BN-ReLU keeps the pooled features normalised; the feature
  // extractor stops before it.
  net.template emplace<nn::BatchNorm<T>>(channels);
  net.template emplace<nn::Relu<T>>();
  net.template emplace<nn::GlobalAvgPool<T>>();
  net.template emplace<nn::SoftmaxClassifier<T>>(channels, config.num_classes);
  return net;
}

void check_feature_input(std::size_t height, std::size_t width) {
  if (height < kMinFeatureInput || width < kMinFeatureInput) {
    throw ContractError("extract_features: input " + std::to_string(height) + "x" +
                        std::to_string(width) + " is smaller than " +
                        std::to_string(kMinFeatureInput));
  }
  if (height % kDownsampling != 0 || width % kDownsampling != 0) {
    throw ContractError("extract_features: input " + std::to_string(height) + "x" +
                        std::to_string(width) + " is not divisible by " +
                        std::to_string(kDownsampling));
  }
}

template <typename T>
nn::Tensor<T> extract_features(const nn::Network<T>& wrn, const WrnConfig& config,
                               const nn::Tensor<T>& input) {
  check_feature_input(input.shape().h, input.shape().w);
  return wrn.infer_prefix(input, feature_layer_count(config));
}

template nn::Network<float> build_wrn<float>(const WrnConfig&);
template nn::Network<double> build_wrn<double>(const WrnConfig&);
template nn::Tensor<float> extract_features<float>(const nn::Network<float>&, const WrnConfig&,
                                                   const nn::Tensor<float>&);
template nn::Tensor<double> extract_features<double>(const nn::Network<double>&,
                                                     const WrnConfig&,
                                                     const nn::Tensor<double>&);

}  // namespace casnn::wrn
