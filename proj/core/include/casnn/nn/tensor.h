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

#ifndef CASNN_NN_TENSOR_H_
#define CASNN_NN_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "casnn/common/error.h"

namespace casnn::nn {

// (batch, channel, height, width).
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t size() const { return n * c * h * w; }
  std::size_t spatial() const { return h * w; }
  std::size_t per_sample() const { return c * h * w; }
  bool operator==(const Shape&) const = default;
  std::string to_string() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
  }
};

// Dense row-major NCHW array.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape), data_(shape.size(), fill) {}
  Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ContractError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape_.to_string());
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T* sample(std::size_t i) { return data_.data() + i * shape_.per_sample(); }
  const T* sample(std::size_t i) const { return data_.data() + i * shape_.per_sample(); }

  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  // Reinterprets the same values under a shape of equal size.
  void reshape(Shape shape) {
    if (shape.size() != data_.size()) {
      throw ContractError("cannot reshape " + shape_.to_string() + " to " + shape.to_string());
    }
    shape_ = shape;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  std::size_t bytes() const { return data_.size() * sizeof(T); }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

// Copies samples [first, first + count) into a new tensor.
template <typename T>
Tensor<T> slice_batch(const Tensor<T>& t, std::size_t first, std::size_t count) {
  if (first + count > t.shape().n) throw ContractError("slice_batch out of range");
  Shape s = t.shape();
  s.n = count;
  std::vector<T> data(t.sample(first), t.sample(first) + count * s.per_sample());
  return Tensor<T>(s, std::move(data));
}

}  // namespace casnn::nn

#endif  // CASNN_NN_TENSOR_H_
