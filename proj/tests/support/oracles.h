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

#ifndef CASNN_TESTS_SUPPORT_ORACLES_H_
#define CASNN_TESTS_SUPPORT_ORACLES_H_

// Independent reference implementations: brute force, definitional formulas,
// exact integer arithmetic. None of them share code with the library paths
// they check.

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "casnn/geometry/label_map.h"
#include "casnn/geometry/predicates.h"
#include "casnn/metrics/metrics.h"

namespace casnn::testing {

// Nearest seed for every non-background cell by exhaustive search, ties to
// the lowest seed index.
inline std::vector<std::int32_t> brute_force_voronoi(const geometry::LabelMap& map,
                                                     const std::vector<geometry::Point>& seeds) {
  std::vector<std::int32_t> owner(map.rows * map.cols, -1);
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      if (map.at(r, c) == geometry::kBackground || seeds.empty()) continue;
      const double y = static_cast<double>(r), x = static_cast<double>(c);
      std::size_t best = 0;
      double best_d2 = 0;
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        const double dy = y - seeds[s].y, dx = x - seeds[s].x;
        const double d2 = dy * dy + dx * dx;
        if (s == 0 || d2 < best_d2) {
          best = s;
          best_d2 = d2;
        }
      }
      owner[r * map.cols + c] = static_cast<std::int32_t>(best);
    }
  }
  return owner;
}

// Number of 8-connected regions of `label` by explicit-stack flood fill.
inline std::size_t flood_fill_count(const geometry::LabelMap& map, std::uint8_t label) {
  std::vector<char> seen(map.rows * map.cols, 0);
  std::size_t count = 0;
  for (std::size_t start = 0; start < seen.size(); ++start) {
    if (seen[start] || map.labels[start] != label) continue;
    ++count;
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const long r = static_cast<long>(i / map.cols), c = static_cast<long>(i % map.cols);
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= static_cast<long>(map.rows) ||
              cc >= static_cast<long>(map.cols))
            continue;
          const std::size_t j = static_cast<std::size_t>(rr) * map.cols + static_cast<std::size_t>(cc);
          if (!seen[j] && map.labels[j] == label) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
    }
  }
  return count;
}

struct IntPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
};

inline std::int64_t orient_exact(const IntPoint& a, const IntPoint& b, const IntPoint& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// > 0 when d is strictly inside the circumcircle of counter-clockwise a, b, c.
// Coordinates must stay below ~2^14 so the products fit in int64.
inline std::int64_t incircle_exact(const IntPoint& a, const IntPoint& b, const IntPoint& c,
                                   const IntPoint& d) {
  const std::int64_t adx = a.x - d.x, ady = a.y - d.y;
  const std::int64_t bdx = b.x - d.x, bdy = b.y - d.y;
  const std::int64_t cdx = c.x - d.x, cdy = c.y - d.y;
  const std::int64_t alift = adx * adx + ady * ady;
  const std::int64_t blift = bdx * bdx + bdy * bdy;
  const std::int64_t clift = cdx * cdx + cdy * cdy;
  return alift * (bdx * cdy - cdx * bdy) - blift * (adx * cdy - cdx * ady) +
         clift * (adx * bdy - bdx * ady);
}

// No duplicates, no three collinear, no four cocircular points.
inline bool general_position(const std::vector<IntPoint>& p) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (p[i].x == p[j].x && p[i].y == p[j].y) return false;
      for (std::size_t k = j + 1; k < n; ++k) {
        if (orient_exact(p[i], p[j], p[k]) == 0) return false;
        for (std::size_t l = k + 1; l < n; ++l) {
          if (incircle_exact(p[i], p[j], p[k], p[l]) == 0) return false;
        }
      }
    }
  }
  return true;
}

// O(n^4): edge ij is Delaunay iff some triangle ijk has an empty circumcircle.
inline std::vector<std::set<std::size_t>> brute_force_delaunay_neighbors(
    const std::vector<IntPoint>& p) {
  const std::size_t n = p.size();
  std::vector<std::set<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        std::size_t a = i, b = j, c = k;
        const std::int64_t o = orient_exact(p[a], p[b], p[c]);
        if (o == 0) continue;
        if (o < 0) std::swap(b, c);
        bool empty = true;
        for (std::size_t l = 0; l < n && empty; ++l) {
          if (l == a || l == b || l == c) continue;
          if (incircle_exact(p[a], p[b], p[c], p[l]) > 0) empty = false;
        }
        if (!empty) continue;
        for (auto [u, v] : {std::pair{i, j}, std::pair{j, k}, std::pair{i, k}}) {
          nbrs[u].insert(v);
          nbrs[v].insert(u);
        }
      }
    }
  }
  return nbrs;
}

// (p_o - p_e) / (1 - p_e) from floating-point proportions.
inline double kappa_by_definition(const metrics::ConfusionMatrix& cm) {
  const double n = static_cast<double>(cm.total());
  double po = 0, pe = 0;
  for (std::size_t k = 0; k < cm.classes(); ++k) {
    po += static_cast<double>(cm.at(k, k)) / n;
    pe += (static_cast<double>(cm.row_sum(k)) / n) * (static_cast<double>(cm.column_sum(k)) / n);
  }
  return (po - pe) / (1 - pe);
}

// Fraction of (positive, negative) pairs ranked correctly, ties one half.
inline double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace casnn::testing

#endif  // CASNN_TESTS_SUPPORT_ORACLES_H_
