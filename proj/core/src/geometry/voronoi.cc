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

#include "casnn/geometry/voronoi.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "casnn/common/error.h"
#include "casnn/common/parallel.h"
#include "casnn/geometry/features.h"

namespace casnn::geometry {
namespace {

__extension__ using Int128 = __int128;

}  // namespace

VoronoiPartition area_voronoi(const LabelMap& map, const std::vector<Point>& seeds,
                              std::size_t threads) {
  if (map.labels.size() != map.rows * map.cols) throw ContractError("label map size mismatch");
  VoronoiPartition out;
  out.rows = map.rows;
  out.cols = map.cols;
  out.regions = seeds.size();
  out.owner.assign(map.rows * map.cols, kNoRegion);
  if (seeds.empty()) return out;

  // Seeds sorted by row; the search walks outwards from the cell's row and
  // stops once the row gap alone exceeds the best squared distance.
  std::vector<std::size_t> by_row(seeds.size());
  std::iota(by_row.begin(), by_row.end(), 0);
  std::stable_sort(by_row.begin(), by_row.end(),
                   [&](std::size_t a, std::size_t b) { return seeds[a].y < seeds[b].y; });
  std::vector<double> seed_rows(seeds.size());
  for (std::size_t i = 0; i < by_row.size(); ++i) seed_rows[i] = seeds[by_row[i]].y;

  parallel_for(map.rows, threads, [&](std::size_t r) {
    const double y = static_cast<double>(r);
    const std::size_t pivot = static_cast<std::size_t>(
        std::lower_bound(seed_rows.begin(), seed_rows.end(), y) - seed_rows.begin());
    for (std::size_t c = 0; c < map.cols; ++c) {
      if (map.at(r, c) == kBackground) continue;
      const double x = static_cast<double>(c);
      double best = INFINITY;
      std::size_t owner = seeds.size();
      auto consider = [&](std::size_t k) {
        const std::size_t s = by_row[k];
        const double dy = y - seeds[s].y;
        const double dx = x - seeds[s].x;
        const double d2 = dy * dy + dx * dx;
        if (d2 < best || (d2 == best && s < owner)) {
          best = d2;
          owner = s;
        }
      };
      for (std::size_t k = pivot; k < by_row.size(); ++k) {
        const double dy = seed_rows[k] - y;
        if (dy * dy > best) break;
        consider(k);
      }
      for (std::size_t k = pivot; k-- > 0;) {
        const double dy = y - seed_rows[k];
        if (dy * dy > best) break;
        consider(k);
      }
      out.owner[r * map.cols + c] = static_cast<std::int32_t>(owner);
    }
  });
  return out;
}

double eccentricity(const std::vector<Cell>& cells) {
  if (cells.size() < 2) return 0.0;
  // Exact integer moments: n^2 * central moment = n * sum(uv) - sum(u) * sum(v).
  Int128 sr = 0, sc = 0, srr = 0, scc = 0, src = 0;
  for (const Cell& cell : cells) {
    sr += cell.row;
    sc += cell.col;
    srr += static_cast<Int128>(cell.row) * cell.row;
    scc += static_cast<Int128>(cell.col) * cell.col;
    src += static_cast<Int128>(cell.row) * cell.col;
  }
  const Int128 n = static_cast<Int128>(cells.size());
  const double a = static_cast<double>(n * srr - sr * sr);
  const double b = static_cast<double>(n * scc - sc * sc);
  const double c = static_cast<double>(n * src - sr * sc);
  const double half_sum = 0.5 * (a + b);
  const double root = std::sqrt(0.25 * (a - b) * (a - b) + c * c);
  const double major = half_sum + root;
  const double minor = std::max(0.0, half_sum - root);
  if (major <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, 1.0 - minor / major));
}

std::array<double, kVoronoiFeatureCount> voronoi_features(const VoronoiPartition& partition,
                                                          const std::vector<Component>& lesions,
                                                          const LabelMap& map) {
  std::array<double, kVoronoiFeatureCount> out{};
  if (partition.regions == 0) return out;
  if (partition.owner.size() != map.rows * map.cols) {
    throw ContractError("voronoi partition does not match the label map");
  }
  std::vector<std::uint8_t> lesion(map.rows * map.cols, 0);
  for (const Component& comp : lesions) {
    for (const Cell& cell : comp.cells) {
      lesion[static_cast<std::size_t>(cell.row) * map.cols + static_cast<std::size_t>(cell.col)] =
          1;
    }
  }
  std::vector<std::vector<Cell>> region_cells(partition.regions);
  std::vector<std::size_t> lesion_cells(partition.regions, 0);
  std::size_t tissue = 0;
  for (std::size_t i = 0; i < partition.owner.size(); ++i) {
    const std::int32_t k = partition.owner[i];
    if (k == kNoRegion) continue;
    ++tissue;
    region_cells[static_cast<std::size_t>(k)].push_back(
        {static_cast<std::int32_t>(i / map.cols), static_cast<std::int32_t>(i % map.cols)});
    lesion_cells[static_cast<std::size_t>(k)] += lesion[i];
  }
  std::vector<double> area, ecc, tissue_ratio, lesion_ratio;
  for (std::size_t k = 0; k < partition.regions; ++k) {
    const double count = static_cast<double>(region_cells[k].size());
    area.push_back(count * map.cell_area_um2());
    ecc.push_back(eccentricity(region_cells[k]));
    tissue_ratio.push_back(tissue ? count / static_cast<double>(tissue) : 0.0);
    lesion_ratio.push_back(count > 0 ? static_cast<double>(lesion_cells[k]) / count : 0.0);
  }
  std::size_t o = 0;
  for (const auto* metric : {&area, &ecc, &tissue_ratio, &lesion_ratio}) {
    const Summary s = summarize(*metric);
    out[o++] = s.mean;
    out[o++] = s.median;
    out[o++] = s.stddev;
  }
  out[o] = *std::max_element(area.begin(), area.end());
  return out;
}

}  // namespace casnn::geometry
