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

#ifndef CASNN_GEOMETRY_VORONOI_H_
#define CASNN_GEOMETRY_VORONOI_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "casnn/geometry/label_map.h"
#include "casnn/geometry/predicates.h"

namespace casnn::geometry {

inline constexpr std::int32_t kNoRegion = -1;

struct VoronoiPartition {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t regions = 0;
  std::vector<std::int32_t> owner;  // per cell: seed index or kNoRegion
};

// Assigns every tissue cell (label != background) to the nearest seed by
// Euclidean distance between cell centre and seed (cell units), ties to the
// lowest seed index. Rows are processed independently on `threads` workers.
VoronoiPartition area_voronoi(const LabelMap& map, const std::vector<Point>& seeds,
                              std::size_t threads = 1);

// Second-moment ellipse eccentricity of a set of cells; 0 when degenerate.
double eccentricity(const std::vector<Cell>& cells);

inline constexpr std::size_t kVoronoiFeatureCount = 13;

// Per region: area (um^2), eccentricity, region/tissue area, lesion/region
// area, where lesion cells are those of `lesions`. Returns mean/median/std of
// each metric in that order, then the largest region area.
std::array<double, kVoronoiFeatureCount> voronoi_features(
    const VoronoiPartition& partition, const std::vector<Component>& lesions,
    const LabelMap& map);

}  // namespace casnn::geometry

#endif  // CASNN_GEOMETRY_VORONOI_H_
