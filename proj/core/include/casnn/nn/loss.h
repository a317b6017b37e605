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

#ifndef CASNN_NN_LOSS_H_
#define CASNN_NN_LOSS_H_

#include <span>

#include "casnn/nn/tensor.h"

namespace casnn::nn {

template <typename T>
struct LossResult {
  double loss = 0.0;          // mean negative log-probability of the targets
  Tensor<T> probabilities;    // (n, classes, 1, 1)
  Tensor<T> grad;             // d loss / d logits
};

// Softmax over the channel axis, stabilised by max subtraction. Logits must
// be (n, classes, 1, 1).
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> targets);

}  // namespace casnn::nn

#endif  // CASNN_NN_LOSS_H_
