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

#ifndef CASNN_NN_LAYERS_H_
#define CASNN_NN_LAYERS_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "casnn/nn/layer.h"
#include "casnn/nn/tensor.h"

namespace casnn::nn {

// 2-D cross-correlation (no kernel flip). Kernels are square, 3x3 with
// padding 1 or 1x1 with padding 0.
template <typename T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
         std::size_t stride, bool bias = false);

  LayerKind kind() const override { return LayerKind::kConv2d; }
  LayerSpec spec() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> infer(const Tensor<T>& input) const override;
  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override;
  void collect_parameters(std::vector<Parameter<T>*>& out) override;
  void collect_state(const std::string& prefix, std::vector<StateTensor<T>>& out) override;
  bool has_cache() const override { return has_cache_; }
  std::size_t retained_bytes() const override { return has_cache_ ? input_.bytes() : 0; }
  void release() override;

  Parameter<T>& weight() { return weight_; }
  const Parameter<T>& weight() const { return weight_; }
  Parameter<T>* bias() { return bias_ ? &*bias_ : nullptr; }
  const Parameter<T>* bias() const { return bias_ ? &*bias_ : nullptr; }

  std::size_t in_channels() const { return in_; }
  std::size_t out_channels() const { return out_; }
  std::size_t kernel() const { return k_; }
  std::size_t stride() const { return stride_; }
  std::size_t padding() const { return pad_; }

 private:
  std::size_t in_;
  std::size_t out_;
  std::size_t k_;
  std::size_t stride_;
  std::size_t pad_;
  Parameter<T> weight_;
  std::optional<Parameter<T>> bias_;
  Tensor<T> input_;
  bool has_cache_ = false;
};

// Direct functional form: output of a bias-free cross-correlation.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, std::size_t stride,
                         std::size_t padding);

// Per-channel batch normalisation. Train mode normalises with batch
// statistics over n*h*w and updates the running estimates (exponential moving
// average, momentum 0.9); infer mode and frozen layers use the running values.
template <typename T>
class BatchNorm : public Layer<T> {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.9;

  explicit BatchNorm(std::size_t channels);

  LayerKind kind() const override { return LayerKind::kBatchNorm; }
  LayerSpec spec() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> infer(const Tensor<T>& input) const override;
  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override;
  void collect_parameters(std::vector<Parameter<T>*>& out) override;
  void collect_state(const std::string& prefix, std::vector<StateTensor<T>>& out) override;
  bool has_cache() const override { return has_cache_; }
  std::size_t retained_bytes() const override {
    return has_cache_ ? normalized_.bytes() + inv_std_.size() * sizeof(T) : 0;
  }
  void release() override;

  Parameter<T>& gamma() { return gamma_; }
  Parameter<T>& beta() { return beta_; }
  Tensor<T>& running_mean() { return running_mean_; }
  Tensor<T>& running_var() { return running_var_; }
  const Tensor<T>& running_mean() const { return running_mean_; }
  const Tensor<T>& running_var() const { return running_var_; }
  std::size_t channels() const { return channels_; }

 private:
  std::size_t channels_;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  Tensor<T> running_mean_;
  Tensor<T> running_var_;
  Tensor<T> normalized_;
  Shape normalized_shape_;
  std::vector<T> inv_std_;
  bool batch_stats_ = false;
  bool has_cache_ = false;
};

template <typename T>
class Relu : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::kRelu; }
  LayerSpec spec() const override;
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> infer(const Tensor<T>& input) const override;
  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override;
  bool has_cache() const override { return has_cache_; }
  std::size_t retained_bytes() const override { return has_cache_ ? output_.bytes() : 0; }
  void release() override;

 private:
  Tensor<T> output_;
  bool has_cache_ = false;
};

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

template <typename T>
class GlobalAvgPool : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::kGlobalAvgPool; }
  LayerSpec spec() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> infer(const Tensor<T>& input) const override;
  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override;
  bool has_cache() const override { return has_cache_; }
  std::size_t retained_bytes() const override { return 0; }
  void release() override { has_cache_ = false; }

 private:
  Shape input_shape_;
  bool has_cache_ = false;
};

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input);

// 1x1 convolution with bias producing class logits; the softmax itself is
// applied by the loss or by Network::probabilities.
template <typename T>
class SoftmaxClassifier : public Conv2d<T> {
 public:
  SoftmaxClassifier(std::size_t in_channels, std::size_t num_classes)
      : Conv2d<T>(in_channels, num_classes, 1, 1, /*bias=*/true) {}
  LayerKind kind() const override { return LayerKind::kSoftmaxClassifier; }
  LayerSpec spec() const override;
};

// Pre-activation residual block: the residual path is an arbitrary layer list
// (BN -> ReLU -> conv, twice, in the wide ResNet); the skip path is identity or
// a 1x1 projection of the block input. Paths merge through an elementwise sum.
template <typename T>
class ResidualBlock : public Layer<T> {
 public:
  ResidualBlock(std::vector<LayerPtr<T>> branch, std::unique_ptr<Conv2d<T>> projection);

  LayerKind kind() const override { return LayerKind::kResidualBlock; }
  LayerSpec spec() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor<T> forward(const Tensor<T>& input) override;
  Tensor<T> infer(const Tensor<T>& input) const override;
  Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) override;
  void collect_parameters(std::vector<Parameter<T>*>& out) override;
  void collect_state(const std::string& prefix, std::vector<StateTensor<T>>& out) override;
  void set_trainable(bool trainable) override;
  bool has_cache() const override { return has_cache_; }
  std::size_t retained_bytes() const override;
  void release() override;

  std::size_t branch_size() const { return branch_.size(); }
  Layer<T>& branch_layer(std::size_t i) { return *branch_[i]; }
  Conv2d<T>* projection() { return projection_.get(); }

 private:
  std::vector<LayerPtr<T>> branch_;
  std::unique_ptr<Conv2d<T>> projection_;
  bool has_cache_ = false;
};

// Pre-activation block with two 3x3 convolutions; a stride-2 or
// channel-changing block gets a 1x1 projection on its skip path.
template <typename T>
std::unique_ptr<ResidualBlock<T>> make_preact_block(std::size_t in_channels,
                                                    std::size_t out_channels,
                                                    std::size_t stride);

// Rebuilds a layer (with freshly zeroed/default tensors) from its description.
template <typename T>
LayerPtr<T> make_layer(const LayerSpec& spec);

template <typename T>
Tensor<T> elementwise_sum(const Tensor<T>& a, const Tensor<T>& b);

}  // namespace casnn::nn

#endif  // CASNN_NN_LAYERS_H_
