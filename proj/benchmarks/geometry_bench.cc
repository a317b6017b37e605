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
#include "casnn/geometry/delaunay.h"
#include "casnn/geometry/features.h"
#include "casnn/geometry/voronoi.h"

namespace casnn {
namespace {

// All-tissue map of size n x n with seeds on random cells.
void BM_AreaVoronoi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const geometry::LabelMap map(n, n, 224.0, geometry::kBenign);
  Rng rng(1);
  std::vector<geometry::Point> seeds(static_cast<std::size_t>(state.range(1)));
  for (auto& s : seeds) s = {uniform(rng, 0, n), uniform(rng, 0, n)};
  for (auto _ : state) benchmark::DoNotOptimize(geometry::area_voronoi(map, seeds));
}
BENCHMARK(BM_AreaVoronoi)->Args({64, 16})->Args({256, 64})->Args({512, 256});

void BM_Delaunay(benchmark::State& state) {
  Rng rng(2);
  std::vector<geometry::Point> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {uniform(rng, 0, 1000), uniform(rng, 0, 1000)};
  for (auto _ : state) benchmark::DoNotOptimize(geometry::delaunay(pts));
}
BENCHMARK(BM_Delaunay)->Arg(16)->Arg(256)->Arg(4096);

// Full 49-value feature vector of a map sprinkled with lesion discs.
void BM_AssembleFeatures(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  geometry::LabelMap map(n, n, 224.0, geometry::kBenign);
  Rng rng(3);
  for (int d = 0; d < 30; ++d) {
    const double cr = uniform(rng, 0, n), cc = uniform(rng, 0, n), rad = uniform(rng, 1, 4);
    const auto label = d % 2 ? geometry::kDcis : geometry::kIdc;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= rad * rad) map.at(r, c) = label;
  }
  for (auto _ : state) benchmark::DoNotOptimize(geometry::assemble_features(map));
}
BENCHMARK(BM_AssembleFeatures)->Arg(64)->Arg(256);

}  // namespace
}  // namespace casnn

BENCHMARK_MAIN();
