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

#ifndef CASNN_NN_NETWORK_H_
#define CASNN_NN_NETWORK_H_

#include <cstddef>
#include <memory>
#include <vector>

#include "casnn/nn/layer.h"
#include "casnn/nn/layers.h"
#include "casnn/nn/tensor.h"

namespace casnn::nn {

// Anything the trainer can fit: a training forward that retains activations,
// a backward from logit gradients, and a const forward for evaluation.
template <typename T>
class Model {
 public:
  virtual ~Model() = default;
  virtual Tensor<T> forward(const Tensor<T>& input) = 0;
  virtual void backward(const Tensor<T>& grad_logits) = 0;
  virtual Tensor<T> infer(const Tensor<T>& input) const = 0;
  virtual std::vector<Parameter<T>*> trainable_parameters() = 0;
  virtual std::size_t retained_bytes() const = 0;
};

// Ordered layer graph. Every appended layer is shape-checked against a
// reference input, so a graph that would collapse a spatial extent is rejected
// while it is being built.
//
// Frozen layers evaluate in inference mode. A frozen prefix (all layers up to
// the first trainable one) is run through `infer` during training and keeps
// no activations.
//
// Not thread-safe for forward/backward; `infer` is const and may run
// concurrently.
template <typename T>
class Network final : public Model<T> {
 public:
  Network() = default;
  explicit Network(Shape reference_input);

  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  Layer<T>& add(LayerPtr<T> layer);

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    add(std::move(layer));
    return ref;
  }

  std::size_t layer_count() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
  const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }
  Shape reference_input() const { return reference_input_; }

  Shape output_shape(const Shape& input) const { return output_shape(input, layers_.size()); }
  Shape output_shape(const Shape& input, std::size_t end) const;

  Tensor<T> forward(const Tensor<T>& input) override;
  void backward(const Tensor<T>& grad_logits) override;
  // Backward that also returns the gradient with respect to the network input.
  Tensor<T> backward_to_input(const Tensor<T>& grad_logits);

  Tensor<T> infer(const Tensor<T>& input) const override { return infer_prefix(input, layers_.size()); }
  // Evaluates layers [0, end) only.
  Tensor<T> infer_prefix(const Tensor<T>& input, std::size_t end) const;
  // Softmax over the channel axis of the (n, classes, 1, 1) logits.
  Tensor<T> probabilities(const Tensor<T>& input) const;

  std::vector<Parameter<T>*> parameters();
  std::vector<Parameter<T>*> trainable_parameters() override;
  std::vector<StateTensor<T>> state();
  std::size_t parameter_count() const;

  void set_trainable(bool trainable);
  bool fully_frozen() const;

  std::vector<LayerSpec> specs() const;
  std::size_t retained_bytes() const override;
  void release();

 private:
  Tensor<T> run_backward(const Tensor<T>& grad_logits, bool need_input_grad);

  Shape reference_input_;
  Shape reference_output_;
  std::vector<LayerPtr<T>> layers_;
  std::size_t first_cached_ = 0;
  bool has_forward_ = false;
};

// Builds a network (default tensors) from its serialized layer list.
template <typename T>
Network<T> network_from_specs(Shape reference_input, const std::vector<LayerSpec>& specs);

}  // namespace casnn::nn

#endif  // CASNN_NN_NETWORK_H_
