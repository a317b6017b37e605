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

#include "casnn/nn/layers.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <utility>

#include "conv3x3.h"
#include "gemm.h"

namespace casnn::nn {
namespace {

// Patch-major im2col: row p (one output pixel) holds the c*k*k input values
// under the kernel in (channel, ky, kx) order, zero outside the image.
template <typename T>
void im2col(const T* x, std::size_t c, std::size_t h, std::size_t w, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, T* col) {
  const std::size_t row_len = c * k * k;
  for (std::size_t oy = 0; oy < oh; ++oy) {
    const long iy0 = static_cast<long>(oy * stride) - static_cast<long>(pad);
    for (std::size_t ox = 0; ox < ow; ++ox) {
      const long ix0 = static_cast<long>(ox * stride) - static_cast<long>(pad);
      T* row = col + (oy * ow + ox) * row_len;
      const bool interior = iy0 >= 0 && ix0 >= 0 && iy0 + static_cast<long>(k) <= static_cast<long>(h) &&
                            ix0 + static_cast<long>(k) <= static_cast<long>(w);
      if (interior) {
        const T* base = x + static_cast<std::size_t>(iy0) * w + static_cast<std::size_t>(ix0);
        for (std::size_t ci = 0; ci < c; ++ci) {
          const T* xc = base + ci * h * w;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const T* src = xc + ky * w;
            for (std::size_t kx = 0; kx < k; ++kx) *row++ = src[kx];
          }
        }
        continue;
      }
      for (std::size_t ci = 0; ci < c; ++ci) {
        const T* xc = x + ci * h * w;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const long iy = iy0 + static_cast<long>(ky);
          if (iy < 0 || iy >= static_cast<long>(h)) {
            for (std::size_t kx = 0; kx < k; ++kx) *row++ = T(0);
            continue;
          }
          const T* src = xc + static_cast<std::size_t>(iy) * w;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long ix = ix0 + static_cast<long>(kx);
            *row++ = (ix < 0 || ix >= static_cast<long>(w)) ? T(0) : src[ix];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates column gradients back into the image.
template <typename T>
void col2im_add(const T* col, std::size_t c, std::size_t h, std::size_t w, std::size_t k,
                std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, T* x) {
  const std::size_t row_len = c * k * k;
  for (std::size_t oy = 0; oy < oh; ++oy) {
    const long iy0 = static_cast<long>(oy * stride) - static_cast<long>(pad);
    for (std::size_t ox = 0; ox < ow; ++ox) {
      const long ix0 = static_cast<long>(ox * stride) - static_cast<long>(pad);
      const T* row = col + (oy * ow + ox) * row_len;
      for (std::size_t ci = 0; ci < c; ++ci) {
        T* xc = x + ci * h * w;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const long iy = iy0 + static_cast<long>(ky);
          if (iy < 0 || iy >= static_cast<long>(h)) {
            row += k;
            continue;
          }
          T* dst = xc + static_cast<std::size_t>(iy) * w;
          for (std::size_t kx = 0; kx < k; ++kx, ++row) {
            const long ix = ix0 + static_cast<long>(kx);
            if (ix >= 0 && ix < static_cast<long>(w)) dst[ix] += *row;
          }
        }
      }
    }
  }
}

template <typename T>
void conv_forward_impl(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>* bias,
                       std::size_t k, std::size_t stride, std::size_t pad, Tensor<T>& output) {
  const Shape& in = input.shape();
  const Shape& out = output.shape();
  const std::size_t ohw = out.h * out.w;
  const std::size_t row_len = in.c * k * k;
  const bool pointwise = k == 1 && stride == 1;
  bool direct = false;
  std::vector<float> packed;
  std::vector<float> scratch;
  if constexpr (std::is_same_v<T, float>) {
    direct = k == 3 && stride <= 2 && detail::conv3x3_direct_available(out.w);
    if (direct) packed = detail::pack_conv3x3(weight.data(), out.c, in.c, false);
  }
  std::vector<T> col;
  if (!pointwise && !direct) col.resize(ohw * row_len);
  for (std::size_t i = 0; i < in.n; ++i) {
    T* y = output.sample(i);
    if (direct) {
      if constexpr (std::is_same_v<T, float>) {
        detail::conv3x3_direct(input.sample(i), in.c, in.h, in.w, stride, packed.data(), out.c,
                               y, scratch);
      }
    } else if (pointwise) {
      detail::gemm(false, false, out.c, ohw, in.c, T(1), weight.data(), in.c, input.sample(i),
                   ohw, T(0), y, ohw);
    } else {
      im2col(input.sample(i), in.c, in.h, in.w, k, stride, pad, out.h, out.w, col.data());
      detail::gemm(false, true, out.c, ohw, row_len, T(1), weight.data(), row_len, col.data(),
                   row_len, T(0), y, ohw);
    }
    if (bias) {
      for (std::size_t co = 0; co < out.c; ++co) {
        const T b = (*bias)[co];
        T* yc = y + co * ohw;
        for (std::size_t p = 0; p < ohw; ++p) yc[p] += b;
      }
    }
  }
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d:
      return "conv2d";
    case LayerKind::kBatchNorm:
      return "batchnorm";
    case LayerKind::kRelu:
      return "relu";
    case LayerKind::kGlobalAvgPool:
      return "global_avg_pool";
    case LayerKind::kSoftmaxClassifier:
      return "softmax_classifier";
    case LayerKind::kResidualBlock:
      return "residual_block";
    case LayerKind::kElementwiseSum:
      return "elementwise_sum";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (LayerKind kind : {LayerKind::kConv2d, LayerKind::kBatchNorm, LayerKind::kRelu,
                         LayerKind::kGlobalAvgPool, LayerKind::kSoftmaxClassifier,
                         LayerKind::kResidualBlock, LayerKind::kElementwiseSum}) {
    if (to_string(kind) == name) return kind;
  }
  throw ContractError("unknown layer kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                  std::size_t stride, bool bias)
    : in_(in_channels), out_(out_channels), k_(kernel), stride_(stride), pad_(kernel / 2) {
  require(kernel == 1 || kernel == 3,
          "conv2d: only 1x1 and 3x3 kernels are supported, got " + std::to_string(kernel));
  require(stride >= 1, "conv2d: stride must be positive");
  require(in_channels > 0 && out_channels > 0, "conv2d: channel counts must be positive");
  weight_.name = "weight";
  weight_.value = Tensor<T>(Shape{out_, in_, k_, k_});
  if (bias) {
    Parameter<T> b;
    b.name = "bias";
    b.value = Tensor<T>(Shape{out_, 1, 1, 1});
    bias_ = std::move(b);
  }
}

template <typename T>
LayerSpec Conv2d<T>::spec() const {
  LayerSpec s;
  s.kind = kind();
  s.out_ch = out_;
  s.in_ch = in_;
  s.kh = k_;
  s.kw = k_;
  s.stride = stride_;
  s.padding = pad_;
  s.bias = bias_.has_value();
  s.trainable = this->trainable_;
  return s;
}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& input) const {
  const Shape kernel{out_, in_, k_, k_};
  if (input.c != in_ || input.h + 2 * pad_ < k_ || input.w + 2 * pad_ < k_ || input.h == 0 ||
      input.w == 0) {
    throw ContractError("conv2d: input " + input.to_string() + " incompatible with kernel " +
                        kernel.to_string());
  }
  return Shape{input.n, out_, (input.h + 2 * pad_ - k_) / stride_ + 1,
               (input.w + 2 * pad_ - k_) / stride_ + 1};
}

template <typename T>
Tensor<T> Conv2d<T>::infer(const Tensor<T>& input) const {
  Tensor<T> output(output_shape(input.shape()));
  conv_forward_impl(input, weight_.value, bias_ ? &bias_->value : nullptr, k_, stride_, pad_,
                    output);
  return output;
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& input) {
  Tensor<T> output = infer(input);
  input_ = input;
  has_cache_ = true;
  return output;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_output, bool need_input_grad) {
  require(has_cache_, "conv2d: backward called before forward");
  const Shape& in = input_.shape();
  const Shape out = output_shape(in);
  require(grad_output.shape() == out, "conv2d: gradient shape " +
                                          grad_output.shape().to_string() +
                                          " does not match output " + out.to_string());
  const bool weight_grads = this->trainable_;
  const std::size_t ohw = out.h * out.w;
  const std::size_t hw = in.h * in.w;
  const std::size_t row_len = in_ * k_ * k_;
  const bool pointwise = k_ == 1 && stride_ == 1;

  Tensor<T> grad_input;
  if (need_input_grad) grad_input = Tensor<T>(in);
  if (weight_grads) {
    weight_.grad = Tensor<T>(weight_.value.shape());
    if (bias_) bias_->grad = Tensor<T>(bias_->value.shape());
  }
  if (!weight_grads && !need_input_grad) {
    release();
    return grad_input;
  }

  bool direct = false;
  std::vector<float> packed;
  std::vector<float> scratch;
  if constexpr (std::is_same_v<T, float>) {
    direct = k_ == 3 && stride_ == 1 && detail::conv3x3_direct_available(in.w);
    if (direct && need_input_grad) {
      packed = detail::pack_conv3x3(weight_.value.data(), out_, in_, true);
    }
  }
  std::vector<T> col;
  std::vector<T> dcol;
  if (!pointwise && !direct) {
    if (weight_grads) col.resize(ohw * row_len);
    if (need_input_grad) dcol.resize(ohw * row_len);
  }
  for (std::size_t i = 0; i < in.n; ++i) {
    const T* dy = grad_output.sample(i);
    if (pointwise) {
      if (weight_grads) {
        detail::gemm(false, true, out_, in_, hw, T(1), dy, hw, input_.sample(i), hw, T(1),
                     weight_.grad.data(), in_);
      }
      if (need_input_grad) {
        detail::gemm(true, false, in_, hw, out_, T(1), weight_.value.data(), in_, dy, hw, T(0),
                     grad_input.sample(i), hw);
      }
    } else if (direct) {
      if constexpr (std::is_same_v<T, float>) {
        if (weight_grads) {
          detail::conv3x3_weight_grad(input_.sample(i), in_, in.h, in.w, dy, out_,
                                      weight_.grad.data(), scratch);
        }
        if (need_input_grad) {
          detail::conv3x3_direct(dy, out_, out.h, out.w, 1, packed.data(), in_,
                                 grad_input.sample(i), scratch);
        }
      }
    } else {
      if (weight_grads) {
        im2col(input_.sample(i), in.c, in.h, in.w, k_, stride_, pad_, out.h, out.w, col.data());
        detail::gemm(false, false, out_, row_len, ohw, T(1), dy, ohw, col.data(), row_len, T(1),
                     weight_.grad.data(), row_len);
      }
      if (need_input_grad) {
        detail::gemm(true, false, ohw, row_len, out_, T(1), dy, ohw, weight_.value.data(),
                     row_len, T(0), dcol.data(), row_len);
        col2im_add(dcol.data(), in.c, in.h, in.w, k_, stride_, pad_, out.h, out.w,
                   grad_input.sample(i));
      }
    }
    if (weight_grads && bias_) {
      for (std::size_t co = 0; co < out_; ++co) {
        T acc = T(0);
        const T* dyc = dy + co * ohw;
        for (std::size_t p = 0; p < ohw; ++p) acc += dyc[p];
        bias_->grad[co] += acc;
      }
    }
  }
  release();
  return grad_input;
}

template <typename T>
void Conv2d<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
  out.push_back(&weight_);
  if (bias_) out.push_back(&*bias_);
}

template <typename T>
void Conv2d<T>::collect_state(const std::string& prefix, std::vector<StateTensor<T>>& out) {
  out.push_back({prefix + "weight", &weight_.value});
  if (bias_) out.push_back({prefix + "bias", &bias_->value});
}

template <typename T>
void Conv2d<T>::release() {
  input_ = Tensor<T>();
  has_cache_ = false;
}

template <typename T>
LayerSpec SoftmaxClassifier<T>::spec() const {
  LayerSpec s = Conv2d<T>::spec();
  s.kind = LayerKind::kSoftmaxClassifier;
  return s;
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, std::size_t stride,
                         std::size_t padding) {
  const Shape& ws = weights.shape();
  if (ws.h != ws.w || ws.c != input.shape().c || padding != ws.h / 2) {
    throw ContractError("conv2d: input " + input.shape().to_string() +
                        " incompatible with kernel " + ws.to_string() + " (padding " +
                        std::to_string(padding) + ")");
  }
  Conv2d<T> conv(ws.c, ws.n, ws.h, stride);
  conv.weight().value = weights;
  return conv.infer(input);
}

// ------------------------------------------------------------- BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(std::size_t channels) : channels_(channels) {
  require(channels > 0, "batchnorm: channel count must be positive");
  gamma_.name = "gamma";
  gamma_.value = Tensor<T>(Shape{channels, 1, 1, 1}, T(1));
  beta_.name = "beta";
  beta_.value = Tensor<T>(Shape{channels, 1, 1, 1}, T(0));
  running_mean_ = Tensor<T>(Shape{channels, 1, 1, 1}, T(0));
  running_var_ = Tensor<T>(Shape{channels, 1, 1, 1}, T(1));
}

template <typename T>
LayerSpec BatchNorm<T>::spec() const {
  LayerSpec s;
  s.kind = kind();
  s.out_ch = channels_;
  s.in_ch = channels_;
  s.trainable = this->trainable_;
  return s;
}

template <typename T>
Shape BatchNorm<T>::output_shape(const Shape& input) const {
  if (input.c != channels_) {
    throw ContractError("batchnorm: input " + input.to_string() + " has " +
                        std::to_string(input.c) + " channels, layer expects " +
                        std::to_string(channels_));
  }
  return input;
}

template <typename T>
Tensor<T> BatchNorm<T>::infer(const Tensor<T>& input) const {
  const Shape& s = output_shape(input.shape());
  if (s.n * s.h * s.w == 0) throw ContractError("batchnorm: zero-size channel population");
  Tensor<T> out(s);
  const std::size_t hw = s.h * s.w;
  for (std::size_t c = 0; c < s.c; ++c) {
    const T mean = running_mean_[c];
    const T inv_std = T(1) / std::sqrt(running_var_[c] + T(kEpsilon));
    const T g = gamma_.value[c];
    const T b = beta_.value[c];
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* x = input.data() + (n * s.c + c) * hw;
      T* y = out.data() + (n * s.c + c) * hw;
      for (std::size_t p = 0; p < hw; ++p) y[p] = g * ((x[p] - mean) * inv_std) + b;
    }
  }
  return out;
}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& input) {
  const Shape& s = output_shape(input.shape());
  const std::size_t hw = s.h * s.w;
  const std::size_t population = s.n * hw;
  if (population == 0) throw ContractError("batchnorm: zero-size channel population");
  if (!this->trainable_) {
    Tensor<T> out = infer(input);
    inv_std_.assign(s.c, T(0));
    for (std::size_t c = 0; c < s.c; ++c) {
      inv_std_[c] = T(1) / std::sqrt(running_var_[c] + T(kEpsilon));
    }
    normalized_ = Tensor<T>();
    normalized_shape_ = s;
    batch_stats_ = false;
    has_cache_ = true;
    return out;
  }
  Tensor<T> out(s);
  normalized_ = Tensor<T>(s);
  inv_std_.assign(s.c, T(0));
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* x = input.data() + (n * s.c + c) * hw;
      for (std::size_t p = 0; p < hw; ++p) sum += x[p];
    }
    const double mean = sum / static_cast<double>(population);
    double sq = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* x = input.data() + (n * s.c + c) * hw;
      for (std::size_t p = 0; p < hw; ++p) {
        const double d = x[p] - mean;
        sq += d * d;
      }
    }
    const double var = sq / static_cast<double>(population);
    const T mean_t = static_cast<T>(mean);
    const T inv_std = T(1) / std::sqrt(static_cast<T>(var) + T(kEpsilon));
    inv_std_[c] = inv_std;
    const T g = gamma_.value[c];
    const T b = beta_.value[c];
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* x = input.data() + (n * s.c + c) * hw;
      T* xh = normalized_.data() + (n * s.c + c) * hw;
      T* y = out.data() + (n * s.c + c) * hw;
      for (std::size_t p = 0; p < hw; ++p) {
        xh[p] = (x[p] - mean_t) * inv_std;
        y[p] = g * xh[p] + b;
      }
    }
    running_mean_[c] = static_cast<T>(kMomentum * running_mean_[c] + (1.0 - kMomentum) * mean);
    running_var_[c] = static_cast<T>(kMomentum * running_var_[c] + (1.0 - kMomentum) * var);
  }
  normalized_shape_ = s;
  batch_stats_ = true;
  has_cache_ = true;
  return out;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& grad_output, bool need_input_grad) {
  require(has_cache_, "batchnorm: backward called before forward");
  const Shape s = normalized_shape_;
  require(grad_output.shape() == s, "batchnorm: gradient shape mismatch");
  const std::size_t hw = s.h * s.w;
  const double population = static_cast<double>(s.n * hw);
  Tensor<T> grad_input;
  if (need_input_grad) grad_input = Tensor<T>(s);
  if (!batch_stats_) {
    if (need_input_grad) {
      for (std::size_t c = 0; c < s.c; ++c) {
        const T scale = gamma_.value[c] * inv_std_[c];
        for (std::size_t n = 0; n < s.n; ++n) {
          const T* dy = grad_output.data() + (n * s.c + c) * hw;
          T* dx = grad_input.data() + (n * s.c + c) * hw;
          for (std::size_t p = 0; p < hw; ++p) dx[p] = dy[p] * scale;
        }
      }
    }
    release();
    return grad_input;
  }
  gamma_.grad = Tensor<T>(gamma_.value.shape());
  beta_.grad = Tensor<T>(beta_.value.shape());
  for (std::size_t c = 0; c < s.c; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* dy = grad_output.data() + (n * s.c + c) * hw;
      const T* xh = normalized_.data() + (n * s.c + c) * hw;
      for (std::size_t p = 0; p < hw; ++p) {
        sum_dy += dy[p];
        sum_dy_xhat += static_cast<double>(dy[p]) * xh[p];
      }
    }
    gamma_.grad[c] = static_cast<T>(sum_dy_xhat);
    beta_.grad[c] = static_cast<T>(sum_dy);
    if (!need_input_grad) continue;
    const T scale = gamma_.value[c] * inv_std_[c];
    const T mean_dy = static_cast<T>(sum_dy / population);
    const T mean_dy_xhat = static_cast<T>(sum_dy_xhat / population);
    for (std::size_t n = 0; n < s.n; ++n) {
      const T* dy = grad_output.data() + (n * s.c + c) * hw;
      const T* xh = normalized_.data() + (n * s.c + c) * hw;
      T* dx = grad_input.data() + (n * s.c + c) * hw;
      for (std::size_t p = 0; p < hw; ++p) {
        dx[p] = scale * (dy[p] - mean_dy - xh[p] * mean_dy_xhat);
      }
    }
  }
  release();
  return grad_input;
}

template <typename T>
void BatchNorm<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

template <typename T>
void BatchNorm<T>::collect_state(const std::string& prefix, std::vector<StateTensor<T>>& out) {
  out.push_back({prefix + "gamma", &gamma_.value});
  out.push_back({prefix + "beta", &beta_.value});
  out.push_back({prefix + "running_mean", &running_mean_});
  out.push_back({prefix + "running_var", &running_var_});
}

template <typename T>
void BatchNorm<T>::release() {
  normalized_ = Tensor<T>();
  inv_std_.clear();
  has_cache_ = false;
}

// ------------------------------------------------------------------ Relu

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  const T* x = input.data();
  T* y = out.data();
  for (std::size_t i = 0; i < input.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return out;
}

template <typename T>
LayerSpec Relu<T>::spec() const {
  LayerSpec s;
  s.kind = kind();
  s.trainable = this->trainable_;
  return s;
}

template <typename T>
Tensor<T> Relu<T>::infer(const Tensor<T>& input) const {
  return relu(input);
}

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& input) {
  output_ = relu(input);
  has_cache_ = true;
  return output_;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& grad_output, bool need_input_grad) {
  require(has_cache_, "relu: backward called before forward");
  require(grad_output.shape() == output_.shape(), "relu: gradient shape mismatch");
  Tensor<T> grad_input;
  if (need_input_grad) {
    grad_input = Tensor<T>(output_.shape());
    const T* y = output_.data();
    const T* dy = grad_output.data();
    T* dx = grad_input.data();
    for (std::size_t i = 0; i < output_.size(); ++i) dx[i] = y[i] > T(0) ? dy[i] : T(0);
  }
  release();
  return grad_input;
}

template <typename T>
void Relu<T>::release() {
  output_ = Tensor<T>();
  has_cache_ = false;
}

// --------------------------------------------------------- GlobalAvgPool

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input) {
  const Shape& s = input.shape();
  if (s.h == 0 || s.w == 0) throw ContractError("global_avg_pool: empty spatial extent");
  Tensor<T> out(Shape{s.n, s.c, 1, 1});
  const std::size_t hw = s.h * s.w;
  for (std::size_t i = 0; i < s.n * s.c; ++i) {
    const T* x = input.data() + i * hw;
    double acc = 0.0;
    for (std::size_t p = 0; p < hw; ++p) acc += x[p];
    out[i] = static_cast<T>(acc / static_cast<double>(hw));
  }
  return out;
}

template <typename T>
LayerSpec GlobalAvgPool<T>::spec() const {
  LayerSpec s;
  s.kind = kind();
  s.trainable = this->trainable_;
  return s;
}

template <typename T>
Shape GlobalAvgPool<T>::output_shape(const Shape& input) const {
  if (input.h == 0 || input.w == 0) {
    throw ContractError("global_avg_pool: empty spatial extent in " + input.to_string());
  }
  return Shape{input.n, input.c, 1, 1};
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::infer(const Tensor<T>& input) const {
  return global_avg_pool(input);
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& input) {
  input_shape_ = input.shape();
  has_cache_ = true;
  return global_avg_pool(input);
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& grad_output, bool need_input_grad) {
  require(has_cache_, "global_avg_pool: backward called before forward");
  has_cache_ = false;
  if (!need_input_grad) return {};
  const Shape& s = input_shape_;
  Tensor<T> grad_input(s);
  const std::size_t hw = s.h * s.w;
  const T scale = T(1) / static_cast<T>(hw);
  for (std::size_t i = 0; i < s.n * s.c; ++i) {
    const T g = grad_output[i] * scale;
    T* dx = grad_input.data() + i * hw;
    for (std::size_t p = 0; p < hw; ++p) dx[p] = g;
  }
  return grad_input;
}

// --------------------------------------------------------- ResidualBlock

template <typename T>
Tensor<T> elementwise_sum(const Tensor<T>& a, const Tensor<T>& b) {
  if (!(a.shape() == b.shape())) {
    throw ContractError("elementwise_sum: shape " + a.shape().to_string() + " vs " +
                        b.shape().to_string());
  }
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
ResidualBlock<T>::ResidualBlock(std::vector<LayerPtr<T>> branch,
                                std::unique_ptr<Conv2d<T>> projection)
    : branch_(std::move(branch)), projection_(std::move(projection)) {
  require(!branch_.empty(), "residual_block: empty residual path");
}

template <typename T>
LayerSpec ResidualBlock<T>::spec() const {
  LayerSpec s;
  s.kind = kind();
  s.trainable = this->trainable_;
  for (const auto& layer : branch_) s.branch.push_back(layer->spec());
  if (projection_) s.skip.push_back(projection_->spec());
  return s;
}

template <typename T>
Shape ResidualBlock<T>::output_shape(const Shape& input) const {
  Shape r = input;
  for (const auto& layer : branch_) r = layer->output_shape(r);
  const Shape skip = projection_ ? projection_->output_shape(input) : input;
  if (!(r == skip)) {
    throw ContractError("residual_block: residual path yields " + r.to_string() +
                        " but skip path yields " + skip.to_string());
  }
  return r;
}

template <typename T>
Tensor<T> ResidualBlock<T>::infer(const Tensor<T>& input) const {
  Tensor<T> r = branch_.front()->infer(input);
  for (std::size_t i = 1; i < branch_.size(); ++i) r = branch_[i]->infer(r);
  if (projection_) return elementwise_sum(r, projection_->infer(input));
  return elementwise_sum(r, input);
}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& input) {
  Tensor<T> r = branch_.front()->forward(input);
  for (std::size_t i = 1; i < branch_.size(); ++i) r = branch_[i]->forward(r);
  has_cache_ = true;
  if (projection_) return elementwise_sum(r, projection_->forward(input));
  return elementwise_sum(r, input);
}

template <typename T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& grad_output, bool need_input_grad) {
  require(has_cache_, "residual_block: backward called before forward");
  Tensor<T> g = grad_output;
  for (std::size_t i = branch_.size(); i-- > 0;) {
    g = branch_[i]->backward(g, i > 0 || need_input_grad);
  }
  Tensor<T> skip;
  if (projection_) {
    skip = projection_->backward(grad_output, need_input_grad);
  } else if (need_input_grad) {
    skip = grad_output;
  }
  has_cache_ = false;
  if (!need_input_grad) return {};
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += skip[i];
  return g;
}

template <typename T>
void ResidualBlock<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
  for (auto& layer : branch_) layer->collect_parameters(out);
  if (projection_) projection_->collect_parameters(out);
}

template <typename T>
void ResidualBlock<T>::collect_state(const std::string& prefix,
                                     std::vector<StateTensor<T>>& out) {
  for (std::size_t i = 0; i < branch_.size(); ++i) {
    branch_[i]->collect_state(prefix + "branch." + std::to_string(i) + ".", out);
  }
  if (projection_) projection_->collect_state(prefix + "skip.0.", out);
}

template <typename T>
void ResidualBlock<T>::set_trainable(bool trainable) {
  this->trainable_ = trainable;
  for (auto& layer : branch_) layer->set_trainable(trainable);
  if (projection_) projection_->set_trainable(trainable);
}

template <typename T>
std::size_t ResidualBlock<T>::retained_bytes() const {
  std::size_t total = 0;
  for (const auto& layer : branch_) total += layer->retained_bytes();
  if (projection_) total += projection_->retained_bytes();
  return total;
}

template <typename T>
void ResidualBlock<T>::release() {
  for (auto& layer : branch_) layer->release();
  if (projection_) projection_->release();
  has_cache_ = false;
}

template <typename T>
std::unique_ptr<ResidualBlock<T>> make_preact_block(std::size_t in_channels,
                                                    std::size_t out_channels,
                                                    std::size_t stride) {
  std::vector<LayerPtr<T>> branch;
  branch.push_back(std::make_unique<BatchNorm<T>>(in_channels));
  branch.push_back(std::make_unique<Relu<T>>());
  branch.push_back(std::make_unique<Conv2d<T>>(in_channels, out_channels, 3, stride));
  branch.push_back(std::make_unique<BatchNorm<T>>(out_channels));
  branch.push_back(std::make_unique<Relu<T>>());
  branch.push_back(std::make_unique<Conv2d<T>>(out_channels, out_channels, 3, 1));
  std::unique_ptr<Conv2d<T>> projection;
  if (stride != 1 || in_channels != out_channels) {
    projection = std::make_unique<Conv2d<T>>(in_channels, out_channels, 1, stride);
  }
  return std::make_unique<ResidualBlock<T>>(std::move(branch), std::move(projection));
}

template <typename T>
LayerPtr<T> make_layer(const LayerSpec& spec) {
  LayerPtr<T> layer;
  switch (spec.kind) {
    case LayerKind::kConv2d:
    case LayerKind::kSoftmaxClassifier: {
      require(spec.kh == spec.kw, "conv2d: non-square kernel in spec");
      require(spec.padding == spec.kh / 2, "conv2d: padding must be 1 for 3x3 and 0 for 1x1");
      if (spec.kind == LayerKind::kSoftmaxClassifier) {
        require(spec.kh == 1 && spec.stride == 1 && spec.bias,
                "softmax_classifier must be a 1x1, stride-1 convolution with bias");
        layer = std::make_unique<SoftmaxClassifier<T>>(spec.in_ch, spec.out_ch);
      } else {
        layer = std::make_unique<Conv2d<T>>(spec.in_ch, spec.out_ch, spec.kh, spec.stride,
                                            spec.bias);
      }
      break;
    }
    case LayerKind::kBatchNorm:
      layer = std::make_unique<BatchNorm<T>>(spec.out_ch);
      break;
    case LayerKind::kRelu:
      layer = std::make_unique<Relu<T>>();
      break;
    case LayerKind::kGlobalAvgPool:
      layer = std::make_unique<GlobalAvgPool<T>>();
      break;
    case LayerKind::kResidualBlock: {
      std::vector<LayerPtr<T>> branch;
      for (const LayerSpec& child : spec.branch) branch.push_back(make_layer<T>(child));
      std::unique_ptr<Conv2d<T>> projection;
      if (!spec.skip.empty()) {
        require(spec.skip.size() == 1 && spec.skip[0].kind == LayerKind::kConv2d,
                "residual_block: skip path must be a single projection convolution");
        const LayerSpec& p = spec.skip[0];
        projection = std::make_unique<Conv2d<T>>(p.in_ch, p.out_ch, p.kh, p.stride, p.bias);
      }
      layer = std::make_unique<ResidualBlock<T>>(std::move(branch), std::move(projection));
      break;
    }
    case LayerKind::kElementwiseSum:
      throw ContractError("elementwise_sum only appears inside a residual_block");
  }
  layer->set_trainable(spec.trainable);
  return layer;
}

#define CASNN_INSTANTIATE_LAYERS(T)                                                       \
  template class Conv2d<T>;                                                               \
  template class SoftmaxClassifier<T>;                                                    \
  template class BatchNorm<T>;                                                            \
  template class Relu<T>;                                                                 \
  template class GlobalAvgPool<T>;                                                        \
  template class ResidualBlock<T>;                                                        \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, std::size_t,   \
                                       std::size_t);                                      \
  template Tensor<T> relu<T>(const Tensor<T>&);                                           \
  template Tensor<T> global_avg_pool<T>(const Tensor<T>&);                                \
  template Tensor<T> elementwise_sum<T>(const Tensor<T>&, const Tensor<T>&);              \
  template std::unique_ptr<ResidualBlock<T>> make_preact_block<T>(std::size_t, std::size_t, \
                                                                  std::size_t);           \
  template LayerPtr<T> make_layer<T>(const LayerSpec&);

CASNN_INSTANTIATE_LAYERS(float)
CASNN_INSTANTIATE_LAYERS(double)

#undef CASNN_INSTANTIATE_LAYERS

}  // namespace casnn::nn
