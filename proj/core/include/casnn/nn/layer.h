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

#ifndef CASNN_NN_LAYER_H_
#define CASNN_NN_LAYER_H_

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "casnn/nn/tensor.h"

namespace casnn::nn {

enum class LayerKind {
  kConv2d,
  kBatchNorm,
  kRelu,
  kGlobalAvgPool,
  kSoftmaxClassifier,
  kResidualBlock,
  kElementwiseSum,
};

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

// Serializable description of one layer. Convolution fields are meaningful
// for conv2d and softmax_classifier, `out_ch` doubles as the channel count for
// batchnorm, and residual blocks nest their residual path and (optional)
// projection skip. The two paths merge through an elementwise sum.
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t out_ch = 0;
  std::size_t in_ch = 0;
  std::size_t kh = 0;
  std::size_t kw = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool bias = false;
  bool trainable = true;
  std::vector<LayerSpec> branch;
  std::vector<LayerSpec> skip;

  bool operator==(const LayerSpec&) const = default;
};

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;  // empty until a backward pass reaches a trainable owner
  bool trainable = true;
};

// Persistent tensor (parameter or buffer) in serialization order.
template <typename T>
struct StateTensor {
  std::string name;
  Tensor<T>* tensor = nullptr;
};

// One node of a network. `forward` is the training pass and retains whatever
// `backward` needs; `infer` is const and safe to call concurrently.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual LayerSpec spec() const = 0;

  // Throws ContractError when the input cannot be processed (channel
  // mismatch, spatial extent collapsing to zero).
  virtual Shape output_shape(const Shape& input) const = 0;

  virtual Tensor<T> forward(const Tensor<T>& input) = 0;
  virtual Tensor<T> infer(const Tensor<T>& input) const = 0;

  // Consumes the retained activations. Writes parameter gradients when the
  // layer is trainable. Returns the input gradient, or an empty tensor when
  // `need_input_grad` is false.
  virtual Tensor<T> backward(const Tensor<T>& grad_output, bool need_input_grad) = 0;

  virtual void collect_parameters(std::vector<Parameter<T>*>& out) { (void)out; }
  virtual void collect_state(const std::string& prefix, std::vector<StateTensor<T>>& out) {
    (void)prefix;
    (void)out;
  }

  virtual void set_trainable(bool trainable) { trainable_ = trainable; }
  bool trainable() const { return trainable_; }

  virtual bool has_cache() const = 0;
  virtual std::size_t retained_bytes() const = 0;
  virtual void release() = 0;

 protected:
  bool trainable_ = true;
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

}  // namespace casnn::nn

#endif  // CASNN_NN_LAYER_H_
