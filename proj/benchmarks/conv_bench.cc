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

#include <benchmark/benchmark.h>

#include "casnn/common/rng.h"
#include "casnn/nn/layers.h"

namespace casnn {
namespace {

nn::Tensor<float> random_input(nn::Shape shape, Rng& rng) {
  nn::Tensor<float> x(shape);
  for (auto& v : x.values()) v = static_cast<float>(standard_normal(rng));
  return x;
}

// Args: channels, extent, stride. Reports multiply-accumulates per second.
void BM_Conv3x3Forward(benchmark::State& state) {
  const auto ch = static_cast<std::size_t>(state.range(0));
  const auto extent = static_cast<std::size_t>(state.range(1));
  const auto stride = static_cast<std::size_t>(state.range(2));
  Rng rng(1);
  nn::Conv2d<float> conv(ch, ch, 3, stride);
  const nn::Tensor<float> x = random_input({1, ch, extent, extent}, rng);
  const nn::Shape out = conv.output_shape(x.shape());
  for (auto _ : state) benchmark::DoNotOptimize(conv.infer(x));
  state.counters["MAC/s"] = benchmark::Counter(
      static_cast<double>(out.c * out.h * out.w * ch * 9), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv3x3Forward)
    ->Args({64, 64, 1})
    ->Args({128, 32, 1})
    ->Args({256, 16, 1})
    ->Args({256, 32, 2})
    ->Unit(benchmark::kMillisecond);

void BM_Conv3x3TrainStep(benchmark::State& state) {
  const auto ch = static_cast<std::size_t>(state.range(0));
  const auto extent = static_cast<std::size_t>(state.range(1));
  Rng rng(2);
  nn::Conv2d<float> conv(ch, ch, 3, 1);
  const nn::Tensor<float> x = random_input({2, ch, extent, extent}, rng);
  const nn::Tensor<float> dy = random_input(conv.output_shape(x.shape()), rng);
  for (auto _ : state) {
    conv.forward(x);
    benchmark::DoNotOptimize(conv.backward(dy, true));
  }
}
BENCHMARK(BM_Conv3x3TrainStep)->Args({32, 64})->Args({128, 32})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace casnn

BENCHMARK_MAIN();
