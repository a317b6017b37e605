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

#include "casnn/cascnn/stacked.h"

#include <string>
#include <utility>

#include "casnn/common/error.h"
#include "casnn/nn/init.h"
#include "casnn/nn/layers.h"
#include "casnn/nn/loss.h"

namespace casnn::cascnn {

nlohmann::json to_json(const StackedConfig& config) {
  return {{"training_patch_size", config.training_patch_size},
          {"window_stride", config.window_stride},
          {"num_classes", config.num_classes}};
}

StackedConfig stacked_config_from_json(const nlohmann::json& j) {
  StackedConfig c;
  try {
    c.training_patch_size = j.at("training_patch_size").get<std::size_t>();
    c.window_stride = j.at("window_stride").get<std::size_t>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed stacked config: ") + e.what());
  }
  return c;
}

void validate(const StackedConfig& config) {
  const std::size_t s = config.training_patch_size;
  if (s != 512 && s != 768 && s != 1024) {
    throw ContractError("stacked window must be 512, 768 or 1024, got " + std::to_string(s));
  }
  if (config.window_stride == 0) throw ContractError("window stride must be positive");
  if (config.num_classes < 2) throw ContractError("stacked network needs at least 2 classes");
}

template <typename T>
nn::Network<T> build_top(std::size_t feature_channels, std::size_t feature_size,
                         std::size_t num_classes) {
  nn::Network<T> top(nn::Shape{1, feature_channels, feature_size, feature_size});
  std::size_t channels = feature_channels;
  for (int unit = 0; unit < 2; ++unit) {
    top.template emplace<nn::Conv2d<T>>(channels, kTopWidth, 3, 1);
    top.template emplace<nn::BatchNorm<T>>(kTopWidth);
    top.template emplace<nn::Relu<T>>();
    top.template emplace<nn::Conv2d<T>>(kTopWidth, kTopWidth, 3, 1);
    top.template emplace<nn::BatchNorm<T>>(kTopWidth);
    top.template emplace<nn::Relu<T>>();
    top.template emplace<nn::Conv2d<T>>(kTopWidth, kTopWidth, 3, 2);
    channels = kTopWidth;
  }
  top.add(nn::make_preact_block<T>(kTopWidth, kTopWidth, 1));
  top.template emplace<nn::GlobalAvgPool<T>>();
  top.template emplace<nn::SoftmaxClassifier<T>>(kTopWidth, num_classes);
  return top;
}

template <typename T>
StackedNetwork<T>::StackedNetwork(nn::Network<T> base, wrn::WrnConfig base_config,
                                  nn::Network<T> top, StackedConfig config)
    : base_(std::move(base)),
      base_config_(std::move(base_config)),
      top_(std::move(top)),
      config_(config) {
  validate(config_);
  if (!base_.fully_frozen()) {
    throw ContractError("stacked network requires a fully frozen base");
  }
  if (base_.layer_count() < wrn::feature_layer_count(base_config_)) {
    throw ContractError("base network is shorter than its WRN feature extractor");
  }
}

template <typename T>
nn::Tensor<T> StackedNetwork<T>::features(const nn::Tensor<T>& input) const {
  return wrn::extract_features(base_, base_config_, input);
}

template <typename T>
nn::Tensor<T> StackedNetwork<T>::forward(const nn::Tensor<T>& input) {
  return top_.forward(features(input));
}

template <typename T>
void StackedNetwork<T>::backward(const nn::Tensor<T>& grad_logits) {
  top_.backward(grad_logits);
}

template <typename T>
nn::Tensor<T> StackedNetwork<T>::infer(const nn::Tensor<T>& input) const {
  return top_.infer(features(input));
}

template <typename T>
StackedNetwork<T> build_stacked(nn::Network<T> base, const wrn::WrnConfig& base_config,
                                const StackedConfig& config, Rng& rng) {
  validate(config);
  if (!base.fully_frozen()) {
    throw ContractError("stacked network requires a fully frozen base");
  }
  const std::size_t fs = config.training_patch_size / wrn::kDownsampling;
  nn::Network<T> top = build_top<T>(base_config.feature_channels(), fs, config.num_classes);
  nn::initialize_he(top, rng);
  return StackedNetwork<T>(std::move(base), base_config, std::move(top), config);
}

template <typename T>
nn::Tensor<T> predict_window(const StackedNetwork<T>& stacked, const nn::Tensor<T>& windows) {
  const std::size_t s = stacked.config().training_patch_size;
  if (windows.shape().h != s || windows.shape().w != s) {
    throw ContractError("predict_window: window " + windows.shape().to_string() +
                        " does not match patch size " + std::to_string(s));
  }
  return nn::softmax(stacked.infer(windows));
}

template nn::Network<float> build_top<float>(std::size_t, std::size_t, std::size_t);
template nn::Network<double> build_top<double>(std::size_t, std::size_t, std::size_t);
template class StackedNetwork<float>;
template class StackedNetwork<double>;
template StackedNetwork<float> build_stacked<float>(nn::Network<float>, const wrn::WrnConfig&,
                                                    const StackedConfig&, Rng&);
template StackedNetwork<double> build_stacked<double>(nn::Network<double>,
                                                      const wrn::WrnConfig&,
                                                      const StackedConfig&, Rng&);
template nn::Tensor<float> predict_window<float>(const StackedNetwork<float>&,
                                                 const nn::Tensor<float>&);
template nn::Tensor<double> predict_window<double>(const StackedNetwork<double>&,
                                                   const nn::Tensor<double>&);

}  // namespace casnn::cascnn
