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

#include "casnn/nn/optimizer.h"

#include <string>
#include <utility>

namespace casnn::nn {

template <typename T>
void nesterov_step(std::span<Parameter<T>* const> params, OptimizerState<T>& state) {
  if (state.velocity.empty()) {
    state.velocity.reserve(params.size());
    for (const Parameter<T>* p : params) state.velocity.emplace_back(p->value.shape());
  }
  if (state.velocity.size() != params.size()) {
    throw ContractError("nesterov_step: " + std::to_string(state.velocity.size()) +
                        " velocities for " + std::to_string(params.size()) + " parameters");
  }
  const T mu = static_cast<T>(state.momentum);
  const T lr = static_cast<T>(state.learning_rate);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    Tensor<T>& v = state.velocity[i];
    if (!(v.shape() == p.value.shape())) {
      throw ContractError("nesterov_step: velocity shape " + v.shape().to_string() +
                          " does not mirror parameter " + p.value.shape().to_string());
    }
    if (p.grad.empty()) continue;  // parameter not reached by this backward pass
    if (!(p.grad.shape() == p.value.shape())) {
      throw ContractError("nesterov_step: gradient shape mismatch for " + p.name);
    }
    T* w = p.value.data();
    T* vel = v.data();
    const T* g = p.grad.data();
    for (std::size_t k = 0; k < v.size(); ++k) {
      vel[k] = mu * vel[k] - lr * g[k];
      w[k] = w[k] + vel[k];
    }
  }
}

template <typename T>
NesterovSgd<T>::NesterovSgd(std::vector<Parameter<T>*> params, double learning_rate,
                            double momentum)
    : params_(std::move(params)) {
  state_.learning_rate = learning_rate;
  state_.momentum = momentum;
  for (const Parameter<T>* p : params_) state_.velocity.emplace_back(p->value.shape());
}

template <typename T>
void NesterovSgd<T>::lookahead() {
  if (shifted_) throw ContractError("NesterovSgd: lookahead called twice without step");
  saved_.resize(params_.size());
  const T mu = static_cast<T>(state_.momentum);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor<T>& w = params_[i]->value;
    saved_[i] = w;
    const Tensor<T>& v = state_.velocity[i];
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += mu * v[k];
  }
  shifted_ = true;
}

template <typename T>
void NesterovSgd<T>::step() {
  if (shifted_) {
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i]->value = std::move(saved_[i]);
    saved_.clear();
    shifted_ = false;
  }
  nesterov_step<T>(std::span<Parameter<T>* const>(params_), state_);
}

template void nesterov_step<float>(std::span<Parameter<float>* const>, OptimizerState<float>&);
template void nesterov_step<double>(std::span<Parameter<double>* const>, OptimizerState<double>&);
template class NesterovSgd<float>;
template class NesterovSgd<double>;

}  // namespace casnn::nn
