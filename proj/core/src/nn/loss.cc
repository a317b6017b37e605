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

#include "casnn/nn/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace casnn::nn {

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  const Shape& s = logits.shape();
  if (s.h != 1 || s.w != 1 || s.c == 0) {
    throw ContractError("softmax: logits must be (n, classes, 1, 1), got " + s.to_string());
  }
  Tensor<T> probs(s);
  for (std::size_t i = 0; i < s.n; ++i) {
    const T* z = logits.sample(i);
    T* p = probs.sample(i);
    const T peak = *std::max_element(z, z + s.c);
    double total = 0.0;
    for (std::size_t k = 0; k < s.c; ++k) total += std::exp(static_cast<double>(z[k] - peak));
    for (std::size_t k = 0; k < s.c; ++k) {
      p[k] = static_cast<T>(std::exp(static_cast<double>(z[k] - peak)) / total);
    }
  }
  return probs;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> targets) {
  const Shape& s = logits.shape();
  if (targets.size() != s.n) {
    throw ContractError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                        " targets for batch of " + std::to_string(s.n));
  }
  LossResult<T> result;
  result.probabilities = softmax(logits);
  result.grad = Tensor<T>(s);
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    const int t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= s.c) {
      throw ContractError("softmax_cross_entropy: target " + std::to_string(t) +
                          " out of range for " + std::to_string(s.c) + " classes");
    }
    const T* z = logits.sample(i);
    const T peak = *std::max_element(z, z + s.c);
    double lse = 0.0;
    for (std::size_t k = 0; k < s.c; ++k) lse += std::exp(static_cast<double>(z[k] - peak));
    total += std::log(lse) - static_cast<double>(z[t] - peak);
    const T* p = result.probabilities.sample(i);
    T* g = result.grad.sample(i);
    for (std::size_t k = 0; k < s.c; ++k) {
      const double target = static_cast<std::size_t>(t) == k ? 1.0 : 0.0;
      g[k] = static_cast<T>((static_cast<double>(p[k]) - target) * inv_n);
    }
  }
  result.loss = total * inv_n;
  return result;
}

template Tensor<float> softmax<float>(const Tensor<float>&);
template Tensor<double> softmax<double>(const Tensor<double>&);
template LossResult<float> softmax_cross_entropy<float>(const Tensor<float>&, std::span<const int>);
template LossResult<double> softmax_cross_entropy<double>(const Tensor<double>&,
                                                          std::span<const int>);

}  // namespace casnn::nn
