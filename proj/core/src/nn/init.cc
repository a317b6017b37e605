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

#include "casnn/nn/init.h"

#include <cmath>
#include <vector>

namespace casnn::nn {
namespace {

template <typename T>
void init_layer(Layer<T>& layer, Rng& rng);

template <typename T>
void init_conv(Conv2d<T>& conv, Rng& rng) {
  conv.weight().value = he_init<T>(conv.weight().value.shape(), rng);
  if (conv.bias()) conv.bias()->value.fill(T(0));
}

template <typename T>
void init_layer(Layer<T>& layer, Rng& rng) {
  if (!layer.trainable()) return;
  switch (layer.kind()) {
    case LayerKind::kConv2d:
    case LayerKind::kSoftmaxClassifier:
      init_conv(static_cast<Conv2d<T>&>(layer), rng);
      break;
    case LayerKind::kResidualBlock: {
      auto& block = static_cast<ResidualBlock<T>&>(layer);
      for (std::size_t i = 0; i < block.branch_size(); ++i) init_layer(block.branch_layer(i), rng);
      if (block.projection()) init_conv(*block.projection(), rng);
      break;
    }
    default:
      break;
  }
}

}  // namespace

template <typename T>
Tensor<T> he_init(Shape shape, Rng& rng) {
  const std::size_t fan_in = shape.c * shape.h * shape.w;
  if (fan_in == 0) throw ContractError("he_init: fan_in must be positive for " + shape.to_string());
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  Tensor<T> out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<T>(stddev * standard_normal(rng));
  }
  return out;
}

template <typename T>
void initialize_he(Network<T>& network, Rng& rng) {
  for (std::size_t i = 0; i < network.layer_count(); ++i) init_layer(network.layer(i), rng);
}

template Tensor<float> he_init<float>(Shape, Rng&);
template Tensor<double> he_init<double>(Shape, Rng&);
template void initialize_he<float>(Network<float>&, Rng&);
template void initialize_he<double>(Network<double>&, Rng&);

}  // namespace casnn::nn
