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

#include "casnn/trainproto/mining.h"

#include <algorithm>

#include "casnn/geometry/label_map.h"

namespace casnn::trainproto {

std::vector<Region> false_positive_regions(const cascnn::ProbabilityMap& map,
                                           std::size_t slide) {
  const auto cancer = [&](std::size_t i) {
    if (!map.tissue.empty() && map.tissue[i] == 0) return false;
    const float* p = map.probabilities.data() + i * cascnn::kClasses;
    return std::max_element(p, p + cascnn::kClasses) != p;
  };
  std::vector<Region> out;
  for (const auto& cells : geometry::label_regions(map.rows, map.cols, cancer)) {
    std::size_t r0 = map.rows, r1 = 0, c0 = map.cols, c1 = 0;
    for (const geometry::Cell& cell : cells) {
      const auto row = static_cast<std::size_t>(cell.row);
      const auto col = static_cast<std::size_t>(cell.col);
      r0 = std::min(r0, row);
      r1 = std::max(r1, row);
      c0 = std::min(c0, col);
      c1 = std::max(c1, col);
    }
    out.push_back({slide, map.origin_x + c0 * map.stride, map.origin_y + r0 * map.stride,
                   map.origin_x + c1 * map.stride + map.window,
                   map.origin_y + r1 * map.stride + map.window});
  }
  return out;
}

std::vector<Region> hard_negative_mine(const cascnn::WindowClassifier& classify,
                                       const PatchSampler& sampler, const MeanRgb& mean,
                                       const MiningOptions& options) {
  std::vector<Region> out;
  const auto& slides = sampler.slides();
  for (std::size_t s = 0; s < slides.size(); ++s) {
    const Slide& slide = slides[s];
    if (slide.record.label != 0) continue;
    if (slide.image.width < options.window || slide.image.height < options.window) continue;
    cascnn::DenseOptions dense;
    dense.threads = options.threads;
    dense.tissue = cascnn::cell_tissue_flags(cascnn::tissue_pixels(slide.image),
                                             slide.image.width, slide.image.height,
                                             options.window, options.stride);
    dense.skip_background = true;
    const cascnn::ProbabilityMap map = cascnn::dense_predict(
        classify, preprocess(slide.image, mean), options.window, options.stride, dense);
    for (Region r : false_positive_regions(map, s)) {
      r.x1 = std::min(r.x1, slide.image.width);
      r.y1 = std::min(r.y1, slide.image.height);
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace casnn::trainproto
