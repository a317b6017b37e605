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

#ifndef CASNN_TESTS_SUPPORT_GRADCHECK_H_
#define CASNN_TESTS_SUPPORT_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "casnn/common/rng.h"
#include "casnn/nn/layer.h"
#include "casnn/nn/loss.h"
#include "casnn/nn/network.h"
#include "casnn/nn/tensor.h"

namespace casnn::testing {

inline constexpr double kFiniteStep = 1e-5;
inline constexpr double kGradTolerance = 1e-4;

inline nn::Tensor<double> random_tensor(nn::Shape shape, Rng& rng, double scale = 1.0) {
  nn::Tensor<double> t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = scale * standard_normal(rng);
  return t;
}

// ||a - b|| / max(||a||, ||b||, floor).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b,
                             double floor = 1e-12) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

struct GradReport {
  std::string name;
  double error = 0.0;
  std::size_t coordinates = 0;
};

// Checks d(sum(out * probe))/d(input) and d/d(every trainable parameter) of a
// model by central differences. `loss` must be a pure function of the current
// parameter values and `input`; `backprop` must run forward+backward and
// leave parameter grads in place, returning the input gradient. At most
// `max_coords` coordinates per tensor are probed (evenly strided). An empty
// input gradient skips the input probe.
struct GradCheck {
  std::function<double(const nn::Tensor<double>&)> loss;
  std::function<nn::Tensor<double>(const nn::Tensor<double>&)> backprop;
  std::function<std::vector<nn::Parameter<double>*>()> parameters;
  std::size_t max_coords = 64;

  std::vector<GradReport> run(nn::Tensor<double> input) const {
    std::vector<GradReport> out;
    const nn::Tensor<double> grad_in = backprop(input);
    // Parameter gradients are copied before any perturbed evaluation.
    std::vector<nn::Parameter<double>*> params = parameters();
    std::vector<std::vector<double>> analytic;
    for (auto* p : params) analytic.emplace_back(p->grad.data(), p->grad.data() + p->grad.size());

    const auto probe = [&](double* value, std::size_t n, const std::vector<double>& grad,
                           const std::string& name) {
      const std::size_t step = std::max<std::size_t>(1, n / max_coords);
      std::vector<double> a, numeric;
      for (std::size_t i = 0; i < n; i += step) {
        const double saved = value[i];
        value[i] = saved + kFiniteStep;
        const double up = loss(input);
        value[i] = saved - kFiniteStep;
        const double down = loss(input);
        value[i] = saved;
        numeric.push_back((up - down) / (2 * kFiniteStep));
        a.push_back(grad[i]);
      }
      out.push_back({name, relative_error(a, numeric), a.size()});
    };
    if (!grad_in.empty()) {
      probe(input.data(), input.size(),
            std::vector<double>(grad_in.data(), grad_in.data() + grad_in.size()), "input");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
      probe(params[k]->value.data(), params[k]->value.size(), analytic[k], params[k]->name);
    }
    return out;
  }
};

// Weighted-sum loss: L = sum(out * probe).
inline double weighted_sum(const nn::Tensor<double>& out, const nn::Tensor<double>& probe) {
  double s = 0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.data()[i] * probe.data()[i];
  return s;
}

// Grad check of one layer in train mode under the weighted-sum loss.
inline GradCheck layer_check(nn::Layer<double>& layer, const nn::Tensor<double>& probe) {
  GradCheck check;
  check.loss = [&layer, probe](const nn::Tensor<double>& x) {
    const double l = weighted_sum(layer.forward(x), probe);
    layer.release();
    return l;
  };
  check.backprop = [&layer, probe](const nn::Tensor<double>& x) {
    layer.forward(x);
    return layer.backward(probe, true);
  };
  check.parameters = [&layer] {
    std::vector<nn::Parameter<double>*> params;
    layer.collect_parameters(params);
    return params;
  };
  return check;
}

// Grad check of a whole network under softmax cross-entropy. A network with a
// frozen prefix has no input gradient; pass `input_grad = false` for it.
inline GradCheck network_check(nn::Network<double>& net, std::vector<int> targets,
                               bool input_grad = true) {
  GradCheck check;
  check.loss = [&net, targets](const nn::Tensor<double>& x) {
    const double l = nn::softmax_cross_entropy(net.forward(x), std::span<const int>(targets)).loss;
    net.release();
    return l;
  };
  check.backprop = [&net, targets, input_grad](const nn::Tensor<double>& x) {
    const auto result = nn::softmax_cross_entropy(net.forward(x), std::span<const int>(targets));
    if (input_grad) return net.backward_to_input(result.grad);
    net.backward(result.grad);
    return nn::Tensor<double>();
  };
  check.parameters = [&net] { return net.trainable_parameters(); };
  return check;
}

}  // namespace casnn::testing

#endif  // CASNN_TESTS_SUPPORT_GRADCHECK_H_
