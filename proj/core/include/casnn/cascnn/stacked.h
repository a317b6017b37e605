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

#ifndef CASNN_CASCNN_STACKED_H_
#define CASNN_CASCNN_STACKED_H_

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "casnn/common/rng.h"
#include "casnn/nn/network.h"
#include "casnn/wrn/wrn.h"

namespace casnn::cascnn {

struct StackedConfig {
  std::size_t training_patch_size = 512;
  std::size_t window_stride = 224;
  std::size_t num_classes = 3;
  bool operator==(const StackedConfig&) const = default;
};

nlohmann::json to_json(const StackedConfig& config);
StackedConfig stacked_config_from_json(const nlohmann::json& j);

// Throws ContractError unless the patch size is one of 512/768/1024.
void validate(const StackedConfig& config);

inline constexpr std::size_t kTopWidth = 256;

// Top network over the base's last-conv features: two VGG-style units
// (conv-BN-ReLU, conv-BN-ReLU, stride-2 conv) at 256 channels, one
// pre-activation residual block, global average pooling, 1x1 classifier.
template <typename T>
nn::Network<T> build_top(std::size_t feature_channels, std::size_t feature_size,
                         std::size_t num_classes);

// Frozen WRN feature extractor followed by a trainable top network. The base
// runs in inference mode and retains nothing; only top activations are kept
// for backward.
template <typename T>
class StackedNetwork final : public nn::Model<T> {
 public:
  StackedNetwork(nn::Network<T> base, wrn::WrnConfig base_config, nn::Network<T> top,
                 StackedConfig config);

  nn::Tensor<T> forward(const nn::Tensor<T>& input) override;
  void backward(const nn::Tensor<T>& grad_logits) override;
  nn::Tensor<T> infer(const nn::Tensor<T>& input) const override;
  std::vector<nn::Parameter<T>*> trainable_parameters() override {
    return top_.trainable_parameters();
  }
  std::size_t retained_bytes() const override { return top_.retained_bytes(); }

  nn::Tensor<T> features(const nn::Tensor<T>& input) const;

  const nn::Network<T>& base() const { return base_; }
  const nn::Network<T>& top() const { return top_; }
  nn::Network<T>& top() { return top_; }
  const wrn::WrnConfig& base_config() const { return base_config_; }
  const StackedConfig& config() const { return config_; }

 private:
  nn::Network<T> base_;
  wrn::WrnConfig base_config_;
  nn::Network<T> top_;
  StackedConfig config_;
};

// Freezes nothing: the base must already be fully frozen (ContractError
// otherwise). The top network is He-initialised from `rng`.
template <typename T>
StackedNetwork<T> build_stacked(nn::Network<T> base, const wrn::WrnConfig& base_config,
                                const StackedConfig& config, Rng& rng);

// Softmax probabilities (n, classes, 1, 1) for a batch of windows of exactly
// training_patch_size pixels.
template <typename T>
nn::Tensor<T> predict_window(const StackedNetwork<T>& stacked, const nn::Tensor<T>& windows);

}  // namespace casnn::cascnn

#endif  // CASNN_CASCNN_STACKED_H_
