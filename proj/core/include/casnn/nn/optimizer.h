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

#ifndef CASNN_NN_OPTIMIZER_H_
#define CASNN_NN_OPTIMIZER_H_

#include <span>
#include <vector>

#include "casnn/nn/layer.h"
#include "casnn/nn/tensor.h"

namespace casnn::nn {

template <typename T>
struct OptimizerState {
  std::vector<Tensor<T>> velocity;  // one per parameter, same shape
  double momentum = 0.9;
  double learning_rate = 0.05;
};

// Nesterov update with the gradient taken at the look-ahead point w + mu * v:
//   v' = mu * v - lr * g,  w' = w + v'.
// Velocities are created (zero) on first use.
template <typename T>
void nesterov_step(std::span<Parameter<T>* const> params, OptimizerState<T>& state);

// Drives the look-ahead protocol around nesterov_step: `lookahead()` moves the
// parameters to w + mu * v before the forward pass, `step()` restores w
// exactly and applies the update with the gradients found there.
template <typename T>
class NesterovSgd {
 public:
  NesterovSgd(std::vector<Parameter<T>*> params, double learning_rate, double momentum = 0.9);

  void lookahead();
  void step();

  double learning_rate() const { return state_.learning_rate; }
  void set_learning_rate(double lr) { state_.learning_rate = lr; }
  const OptimizerState<T>& state() const { return state_; }

 private:
  std::vector<Parameter<T>*> params_;
  std::vector<Tensor<T>> saved_;
  OptimizerState<T> state_;
  bool shifted_ = false;
};

}  // namespace casnn::nn

#endif  // CASNN_NN_OPTIMIZER_H_
