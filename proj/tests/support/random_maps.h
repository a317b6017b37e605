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

#ifndef CASNN_TESTS_SUPPORT_RANDOM_MAPS_H_
#define CASNN_TESTS_SUPPORT_RANDOM_MAPS_H_

#include <cmath>
#include <cstdint>
#include <vector>

#include "casnn/common/rng.h"
#include "casnn/geometry/label_map.h"
#include "support/oracles.h"

namespace casnn::testing {

// Elliptical tissue on background with scattered DCIS and IDC discs of
// random radius; some discs are single cells.
inline geometry::LabelMap random_label_map(Rng& rng, std::size_t rows, std::size_t cols,
                                           double spacing_um) {
  geometry::LabelMap map(rows, cols, spacing_um);
  const double cy = rows / 2.0, cx = cols / 2.0;
  const double ry = uniform(rng, 0.3, 0.5) * rows, rx = uniform(rng, 0.3, 0.5) * cols;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double dy = (r - cy) / ry, dx = (c - cx) / rx;
      if (dy * dy + dx * dx <= 1.0) map.at(r, c) = geometry::kBenign;
    }
  }
  const std::size_t blobs = 2 + uniform_index(rng, 10);
  for (std::size_t b = 0; b < blobs; ++b) {
    const std::uint8_t label = uniform01(rng) < 0.5 ? geometry::kDcis : geometry::kIdc;
    const double by = uniform(rng, 0, rows), bx = uniform(rng, 0, cols);
    const double radius = uniform01(rng) < 0.2 ? 0.4 : uniform(rng, 0.5, 5.0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double dy = r - by, dx = c - bx;
        if (dy * dy + dx * dx <= radius * radius && map.at(r, c) != geometry::kBackground) {
          map.at(r, c) = label;
        }
      }
    }
  }
  return map;
}

// Distinct integer points in [0, max_coord]^2 with no three collinear and no
// four cocircular (rejection sampling).
inline std::vector<IntPoint> random_general_points(Rng& rng, std::size_t n,
                                                   std::int64_t max_coord = 1000) {
  for (;;) {
    std::vector<IntPoint> pts(n);
    for (auto& p : pts) {
      p.x = static_cast<std::int64_t>(uniform_index(rng, max_coord + 1));
      p.y = static_cast<std::int64_t>(uniform_index(rng, max_coord + 1));
    }
    if (general_position(pts)) return pts;
  }
}

inline std::vector<geometry::Point> to_points(const std::vector<IntPoint>& pts) {
  std::vector<geometry::Point> out;
  for (const auto& p : pts) out.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  return out;
}

}  // namespace casnn::testing

#endif  // CASNN_TESTS_SUPPORT_RANDOM_MAPS_H_
