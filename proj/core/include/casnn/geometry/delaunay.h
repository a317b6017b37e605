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

#ifndef CASNN_GEOMETRY_DELAUNAY_H_
#define CASNN_GEOMETRY_DELAUNAY_H_

#include <array>
#include <cstddef>
#include <set>
#include <vector>

#include "casnn/geometry/predicates.h"

namespace casnn::geometry {

struct Triangulation {
  std::vector<Point> points;  // after duplicate perturbation
  std::vector<std::array<std::size_t, 3>> triangles;  // counter-clockwise
  std::vector<std::set<std::size_t>> neighbors;       // edge-adjacent nodes
};

// Duplicate points are moved by kDuplicateShift along x (cumulatively per copy).
inline constexpr double kDuplicateShift = 1e-6;

// Delaunay triangulation by lexicographic sweep followed by Lawson edge flips.
// Fewer than three points, or all points collinear, give the path through the
// points in lexicographic order and no triangles.
Triangulation delaunay(std::vector<Point> points);

inline constexpr std::size_t kDelaunayFeatureCount = 7;
inline constexpr double kNeighbourThresholdUm = 1500.0;

// Per node: number of adjacent nodes strictly closer than the threshold and
// their mean distance (0 without such neighbours). Returns mean/median/std of
// both, then the largest per-node mean distance. `points` are in cell units;
// distances are multiplied by `spacing_um`.
std::array<double, kDelaunayFeatureCount> delaunay_features(
    const std::vector<Point>& points, double spacing_um,
    double threshold_um = kNeighbourThresholdUm);

}  // namespace casnn::geometry

#endif  // CASNN_GEOMETRY_DELAUNAY_H_
