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

#ifndef CASNN_GEOMETRY_LABEL_MAP_H_
#define CASNN_GEOMETRY_LABEL_MAP_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "casnn/cascnn/dense.h"

namespace casnn::geometry {

enum Label : std::uint8_t { kBackground = 0, kBenign = 1, kDcis = 2, kIdc = 3 };

struct LabelMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double cell_spacing_um = 1.0;
  std::vector<std::uint8_t> labels;  // row-major

  LabelMap() = default;
  LabelMap(std::size_t r, std::size_t c, double spacing, std::uint8_t fill = kBackground)
      : rows(r), cols(c), cell_spacing_um(spacing), labels(r * c, fill) {}

  std::uint8_t at(std::size_t r, std::size_t c) const { return labels[r * cols + c]; }
  std::uint8_t& at(std::size_t r, std::size_t c) { return labels[r * cols + c]; }
  double cell_area_um2() const { return cell_spacing_um * cell_spacing_um; }
  bool operator==(const LabelMap&) const = default;
};

// Non-tissue cells become background; otherwise 1 + argmax with ties to the
// lowest class.
LabelMap argmax_label_map(const cascnn::ProbabilityMap& map);
LabelMap argmax_label_map(const cascnn::ProbabilityMap& map,
                          const std::vector<std::uint8_t>& tissue);

struct Cell {
  std::int32_t row = 0;
  std::int32_t col = 0;
  auto operator<=>(const Cell&) const = default;
};

struct Component {
  std::uint8_t label = kBackground;
  std::vector<Cell> cells;  // sorted row-major
  double area_um2 = 0.0;
  double centroid_row = 0.0;  // cell units
  double centroid_col = 0.0;
};

// 8-connected maximal regions of cells satisfying `member`, in row-major
// order of their first cell.
std::vector<std::vector<Cell>> label_regions(std::size_t rows, std::size_t cols,
                                             const std::function<bool(std::size_t)>& member);

// 8-connected components of one class, ordered by their first cell.
std::vector<Component> connected_components(const LabelMap& map, std::uint8_t label);

Component make_component(std::uint8_t label, std::vector<Cell> cells, double cell_area_um2);

// Canonical order used by every feature computation: by first cell.
void sort_components(std::vector<Component>& components);

}  // namespace casnn::geometry

#endif  // CASNN_GEOMETRY_LABEL_MAP_H_
