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

#ifndef CASNN_NN_INIT_H_
#define CASNN_NN_INIT_H_

#include "casnn/common/rng.h"
#include "casnn/nn/network.h"
#include "casnn/nn/tensor.h"

namespace casnn::nn {

// Zero-mean Gaussian with variance 2 / fan_in, fan_in = c * h * w of the
// (out, in, kh, kw) weight shape.
template <typename T>
Tensor<T> he_init(Shape shape, Rng& rng);

// He-initialises every trainable convolution weight (biases to zero);
// batch-norm layers keep gamma = 1, beta = 0.
template <typename T>
void initialize_he(Network<T>& network, Rng& rng);

}  // namespace casnn::nn

#endif  // CASNN_NN_INIT_H_
