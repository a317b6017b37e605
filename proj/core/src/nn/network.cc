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

#include "casnn/nn/network.h"

#include <string>
#include <utility>

#include "casnn/nn/loss.h"

namespace casnn::nn {

template <typename T>
Network<T>::Network(Shape reference_input)
    : reference_input_(reference_input), reference_output_(reference_input) {
  if (reference_input.c == 0 || reference_input.h == 0 || reference_input.w == 0) {
    throw ContractError("network: reference input " + reference_input.to_string() +
                        " has an empty dimension");
  }
  reference_input_.n = 1;
  reference_output_.n = 1;
}

template <typename T>
Layer<T>& Network<T>::add(LayerPtr<T> layer) {
  if (reference_input_.size() == 0) {
    throw ContractError("network: constructed without a reference input shape");
  }
  const Shape next = layer->output_shape(reference_output_);
  if (next.c == 0 || next.h == 0 || next.w == 0) {
    throw ContractError("network: layer " + std::to_string(layers_.size()) + " (" +
                        std::string(to_string(layer->kind())) + ") maps " +
                        reference_output_.to_string() + " to empty " + next.to_string());
  }
  reference_output_ = next;
  layers_.push_back(std::move(layer));
  return *layers_.back();
}

template <typename T>
Shape Network<T>::output_shape(const Shape& input, std::size_t end) const {
  Shape s = input;
  for (std::size_t i = 0; i < end && i < layers_.size(); ++i) s = layers_[i]->output_shape(s);
  return s;
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& input) {
  release();
  std::size_t first = 0;
  while (first < layers_.size() && !layers_[first]->trainable()) ++first;
  Tensor<T> x = infer_prefix(input, first);
  for (std::size_t i = first; i < layers_.size(); ++i) x = layers_[i]->forward(x);
  first_cached_ = first;
  has_forward_ = true;
  return x;
}

template <typename T>
Tensor<T> Network<T>::run_backward(const Tensor<T>& grad_logits, bool need_input_grad) {
  if (!has_forward_) throw ContractError("network: backward called before forward");
  if (need_input_grad && first_cached_ > 0) {
    throw ContractError("network: input gradient requested through a frozen prefix");
  }
  Tensor<T> g = grad_logits;
  for (std::size_t i = layers_.size(); i-- > first_cached_;) {
    const bool need = i > first_cached_ || need_input_grad;
    g = layers_[i]->backward(g, need);
  }
  has_forward_ = false;
  return g;
}

template <typename T>
void Network<T>::backward(const Tensor<T>& grad_logits) {
  run_backward(grad_logits, false);
}

template <typename T>
Tensor<T> Network<T>::backward_to_input(const Tensor<T>& grad_logits) {
  return run_backward(grad_logits, true);
}

template <typename T>
Tensor<T> Network<T>::infer_prefix(const Tensor<T>& input, std::size_t end) const {
  if (end == 0) return input;
  Tensor<T> x = layers_.at(0)->infer(input);
  for (std::size_t i = 1; i < end; ++i) x = layers_.at(i)->infer(x);
  return x;
}

template <typename T>
Tensor<T> Network<T>::probabilities(const Tensor<T>& input) const {
  return softmax(infer(input));
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& layer : layers_) layer->collect_parameters(out);
  return out;
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::trainable_parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& layer : layers_) {
    if (layer->trainable()) layer->collect_parameters(out);
  }
  return out;
}

template <typename T>
std::vector<StateTensor<T>> Network<T>::state() {
  std::vector<StateTensor<T>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_state("layers." + std::to_string(i) + ".", out);
  }
  return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t total = 0;
  for (const Parameter<T>* p : const_cast<Network*>(this)->parameters()) total += p->value.size();
  return total;
}

template <typename T>
void Network<T>::set_trainable(bool trainable) {
  for (auto& layer : layers_) layer->set_trainable(trainable);
}

template <typename T>
bool Network<T>::fully_frozen() const {
  for (const auto& layer : layers_) {
    if (layer->trainable()) return false;
  }
  return true;
}

template <typename T>
std::vector<LayerSpec> Network<T>::specs() const {
  std::vector<LayerSpec> out;
  out.reserve(layers_.size());
  for (const auto& layer : layers_) out.push_back(layer->spec());
  return out;
}

template <typename T>
std::size_t Network<T>::retained_bytes() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) total += layer->retained_bytes();
  return total;
}

template <typename T>
void Network<T>::release() {
  for (auto& layer : layers_) layer->release();
  has_forward_ = false;
}

template <typename T>
Network<T> network_from_specs(Shape reference_input, const std::vector<LayerSpec>& specs) {
  Network<T> net(reference_input);
  for (const LayerSpec& spec : specs) net.add(make_layer<T>(spec));
  return net;
}

template class Network<float>;
template class Network<double>;
template Network<float> network_from_specs<float>(Shape, const std::vector<LayerSpec>&);
template Network<double> network_from_specs<double>(Shape, const std::vector<LayerSpec>&);

}  // namespace casnn::nn
