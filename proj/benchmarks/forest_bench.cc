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

#include <vector>

#include "casnn/common/rng.h"
#include "casnn/forest/forest.h"

namespace casnn {
namespace {

// Slide-level problem shape: n rows of 49 features, 3 classes.
forest::Matrix random_features(std::size_t n, std::vector<int>& y) {
  Rng rng(1);
  forest::Matrix x(n, 49);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 3);
    for (std::size_t j = 0; j < 49; ++j) x.at(i, j) = standard_normal(rng) + (j < 5 ? y[i] : 0);
  }
  return x;
}

void BM_TrainForest(benchmark::State& state) {
  std::vector<int> y;
  const forest::Matrix x = random_features(static_cast<std::size_t>(state.range(0)), y);
  forest::ForestConfig config;
  config.n_trees = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(forest::train_forest(x, y, config));
}
BENCHMARK(BM_TrainForest)->Args({90, 512})->Args({1000, 128})->Unit(benchmark::kMillisecond);

void BM_PredictProba(benchmark::State& state) {
  std::vector<int> y;
  const forest::Matrix x = random_features(90, y);
  forest::ForestConfig config;
  const forest::ForestModel model = forest::train_forest(x, y, config);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_proba(x.row(i++ % x.rows)));
}
BENCHMARK(BM_PredictProba);

}  // namespace
}  // namespace casnn

BENCHMARK_MAIN();
