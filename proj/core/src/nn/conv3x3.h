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

#ifndef CASNN_NN_CONV3X3_H_
#define CASNN_NN_CONV3X3_H_

#include <cstddef>
#include <vector>

namespace casnn::nn::detail {

// Direct 3x3 zero-padding-1 convolution kernels over NCHW float data. Each
// call handles one sample, so results never depend on batch composition.
bool conv3x3_direct_available(std::size_t output_width);

// Packs (cout, cin, 3, 3) weights into 8-output blocks. With `adjoint` the
// roles of cin/cout swap and taps are mirrored, which turns the stride-1
// kernel into the input-gradient operator of the original convolution.
std::vector<float> pack_conv3x3(const float* weight, std::size_t cout, std::size_t cin,
                                bool adjoint);

// y (cout, oh, ow) = conv(x (cin, h, w)) with stride 1 or 2.
void conv3x3_direct(const float* x, std::size_t cin, std::size_t h, std::size_t w,
                    std::size_t stride, const float* packed, std::size_t cout, float* y,
                    std::vector<float>& scratch);

// dw (cout, cin, 3, 3) += correlation of x (cin, h, w) with dy (cout, h, w),
// stride 1.
void conv3x3_weight_grad(const float* x, std::size_t cin, std::size_t h, std::size_t w,
                         const float* dy, std::size_t cout, float* dw,
                         std::vector<float>& scratch);

}  // namespace casnn::nn::detail

#endif  // CASNN_NN_CONV3X3_H_
