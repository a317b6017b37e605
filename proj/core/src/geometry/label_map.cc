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

#include "casnn/geometry/label_map.h"

#include <algorithm>
#include <utility>

#include "casnn/common/error.h"

namespace casnn::geometry {

LabelMap argmax_label_map(const cascnn::ProbabilityMap& map) {
  return argmax_label_map(map, map.tissue);
}

LabelMap argmax_label_map(const cascnn::ProbabilityMap& map,
                          const std::vector<std::uint8_t>& tissue) {
  const std::size_t cells = map.rows * map.cols;
  if (tissue.size() != cells) {
    throw ContractError("tissue mask has " + std::to_string(tissue.size()) +
                        " cells, probability map has " + std::to_string(cells));
  }
  LabelMap out(map.rows, map.cols, map.cell_spacing_um());
  for (std::size_t i = 0; i < cells; ++i) {
    if (!tissue[i]) continue;
    const float* p = &map.probabilities[i * cascnn::kClasses];
    std::size_t best = 0;
    for (std::size_t k = 1; k < cascnn::kClasses; ++k) {
      if (p[k] > p[best]) best = k;
    }
    out.labels[i] = static_cast<std::uint8_t>(best + 1);
  }
  return out;
}

std::vector<std::vector<Cell>> label_regions(std::size_t rows, std::size_t cols,
                                             const std::function<bool(std::size_t)>& member) {
  std::vector<std::vector<Cell>> regions;
  std::vector<std::uint8_t> seen(rows * cols, 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < rows * cols; ++start) {
    if (seen[start] || !member(start)) continue;
    std::vector<Cell> cells;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const long r = static_cast<long>(i / cols);
      const long c = static_cast<long>(i % cols);
      cells.push_back({static_cast<std::int32_t>(r), static_cast<std::int32_t>(c)});
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long nr = r + dr;
          const long nc = c + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<long>(rows) || nc >= static_cast<long>(cols)) {
            continue;
          }
          const std::size_t j = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
          if (seen[j] || !member(j)) continue;
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    std::sort(cells.begin(), cells.end());
    regions.push_back(std::move(cells));
  }
  return regions;
}

Component make_component(std::uint8_t label, std::vector<Cell> cells, double cell_area_um2) {
  if (cells.empty()) throw ContractError("component must contain at least one cell");
  std::sort(cells.begin(), cells.end());
  Component comp;
  comp.label = label;
  // Integer coordinate sums are exact, so the centroid does not depend on
  // cell order.
  long long sr = 0;
  long long sc = 0;
  for (const Cell& cell : cells) {
    sr += cell.row;
    sc += cell.col;
  }
  const double n = static_cast<double>(cells.size());
  comp.centroid_row = static_cast<double>(sr) / n;
  comp.centroid_col = static_cast<double>(sc) / n;
  comp.area_um2 = n * cell_area_um2;
  comp.cells = std::move(cells);
  return comp;
}

std::vector<Component> connected_components(const LabelMap& map, std::uint8_t label) {
  if (map.labels.size() != map.rows * map.cols) throw ContractError("label map size mismatch");
  std::vector<Component> out;
  for (auto& cells : label_regions(map.rows, map.cols,
                                   [&](std::size_t i) { return map.labels[i] == label; })) {
    out.push_back(make_component(label, std::move(cells), map.cell_area_um2()));
  }
  return out;
}

void sort_components(std::vector<Component>& components) {
  std::sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
    return a.cells.front() < b.cells.front();
  });
}

}  // namespace casnn::geometry
