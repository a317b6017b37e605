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

#include "casnn/geometry/delaunay.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "casnn/common/error.h"
#include "casnn/geometry/features.h"

namespace casnn::geometry {
namespace {

using Edge = std::pair<std::size_t, std::size_t>;  // directed

bool lex_less(const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

// Triangle soup with a directed-edge index: edge (a, b) maps to the triangle
// that contains it in counter-clockwise order.
class Mesh {
 public:
  explicit Mesh(const std::vector<Point>& pts) : pts_(pts) {}

  void add(std::size_t a, std::size_t b, std::size_t c) {
    const std::size_t t = tris_.size();
    tris_.push_back({a, b, c});
    index(t);
  }

  // Lawson flips until every interior edge is locally Delaunay.
  void legalize() {
    std::vector<Edge> stack;
    for (const auto& [edge, t] : edges_) {
      if (edge.first < edge.second) stack.push_back(edge);
    }
    while (!stack.empty()) {
      const auto [a, b] = stack.back();
      stack.pop_back();
      const auto t1 = edges_.find({a, b});
      const auto t2 = edges_.find({b, a});
      if (t1 == edges_.end() || t2 == edges_.end()) continue;
      const std::size_t c = opposite(t1->second, a, b);
      const std::size_t d = opposite(t2->second, b, a);
      if (incircle(pts_[a], pts_[b], pts_[c], pts_[d]) <= 0) continue;
      const std::size_t i1 = t1->second;
      const std::size_t i2 = t2->second;
      unindex(i1);
      unindex(i2);
      tris_[i1] = {a, d, c};
      tris_[i2] = {d, b, c};
      index(i1);
      index(i2);
      for (const Edge& e : {Edge{a, d}, Edge{d, b}, Edge{b, c}, Edge{c, a}}) stack.push_back(e);
    }
  }

  const std::vector<std::array<std::size_t, 3>>& triangles() const { return tris_; }

 private:
  std::size_t opposite(std::size_t t, std::size_t a, std::size_t b) const {
    for (std::size_t v : tris_[t]) {
      if (v != a && v != b) return v;
    }
    throw ContractError("delaunay: corrupt triangle");
  }
  void index(std::size_t t) {
    const auto& v = tris_[t];
    for (int k = 0; k < 3; ++k) edges_[{v[k], v[(k + 1) % 3]}] = t;
  }
  void unindex(std::size_t t) {
    const auto& v = tris_[t];
    for (int k = 0; k < 3; ++k) edges_.erase({v[k], v[(k + 1) % 3]});
  }

  const std::vector<Point>& pts_;
  std::vector<std::array<std::size_t, 3>> tris_;
  std::map<Edge, std::size_t> edges_;
};

}  // namespace

Triangulation delaunay(std::vector<Point> points) {
  Triangulation out;
  const std::size_t n = points.size();
  out.neighbors.resize(n);
  // Perturb exact duplicates so every node keeps its identity.
  {
    const std::vector<Point> original = points;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return lex_less(original[a], original[b]);
    });
    std::size_t copies = 0;
    for (std::size_t k = 1; k < n; ++k) {
      copies = original[order[k]] == original[order[k - 1]] ? copies + 1 : 0;
      points[order[k]].x = original[order[k]].x + static_cast<double>(copies) * kDuplicateShift;
    }
  }
  out.points = points;
  auto link = [&](std::size_t a, std::size_t b) {
    out.neighbors[a].insert(b);
    out.neighbors[b].insert(a);
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(points[a], points[b]) || (points[a] == points[b] && a < b);
  });

  // First point off the line through the two lexicographically smallest points.
  std::size_t k = 2;
  while (k < n && orient2d(points[order[0]], points[order[1]], points[order[k]]) == 0) ++k;
  if (k >= n) {
    for (std::size_t i = 1; i < n; ++i) link(order[i - 1], order[i]);
    return out;
  }

  Mesh mesh(out.points);
  const std::size_t apex = order[k];
  const bool left = orient2d(points[order[0]], points[order[k - 1]], points[apex]) > 0;
  std::vector<std::size_t> hull;  // counter-clockwise
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (left) {
      mesh.add(order[i], order[i + 1], apex);
    } else {
      mesh.add(order[i + 1], order[i], apex);
    }
  }
  if (left) {
    for (std::size_t i = 0; i < k; ++i) hull.push_back(order[i]);
    hull.push_back(apex);
  } else {
    hull.push_back(order[0]);
    hull.push_back(apex);
    for (std::size_t i = k - 1; i >= 1; --i) hull.push_back(order[i]);
  }

  for (std::size_t idx = k + 1; idx < n; ++idx) {
    const std::size_t q = order[idx];
    const std::size_t h = hull.size();
    std::vector<bool> visible(h);
    for (std::size_t e = 0; e < h; ++e) {
      visible[e] = orient2d(points[hull[e]], points[hull[(e + 1) % h]], points[q]) < 0;
    }
    // Visible edges form one cyclic run [first, first + count).
    std::size_t first = 0;
    while (first < h && !(visible[first] && !visible[(first + h - 1) % h])) ++first;
    if (first == h) throw ContractError("delaunay: sweep point sees no hull edge");
    std::size_t count = 0;
    while (count < h && visible[(first + count) % h]) ++count;
    for (std::size_t e = 0; e < count; ++e) {
      const std::size_t u = hull[(first + e) % h];
      const std::size_t v = hull[(first + e + 1) % h];
      mesh.add(v, u, q);
    }
    // Replace the interior vertices of the visible chain with q.
    std::vector<std::size_t> next;
    const std::size_t start = (first + count) % h;  // end vertex of the chain
    for (std::size_t i = 0; i + count < h + 1; ++i) next.push_back(hull[(start + i) % h]);
    next.push_back(q);
    hull = std::move(next);
  }
  mesh.legalize();
  out.triangles = mesh.triangles();
  for (const auto& t : out.triangles) {
    link(t[0], t[1]);
    link(t[1], t[2]);
    link(t[2], t[0]);
  }
  return out;
}

std::array<double, kDelaunayFeatureCount> delaunay_features(const std::vector<Point>& points,
                                                            double spacing_um,
                                                            double threshold_um) {
  std::array<double, kDelaunayFeatureCount> out{};
  if (points.empty()) return out;
  const Triangulation tri = delaunay(points);
  std::vector<double> counts;
  std::vector<double> mean_dists;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<double> close;
    for (std::size_t j : tri.neighbors[i]) {
      // Distances use the unperturbed points.
      const double d = std::hypot(points[i].x - points[j].x, points[i].y - points[j].y) * spacing_um;
      if (d < threshold_um) close.push_back(d);
    }
    counts.push_back(static_cast<double>(close.size()));
    mean_dists.push_back(close.empty() ? 0.0 : summarize(close).mean);
  }
  const Summary c = summarize(counts);
  const Summary d = summarize(mean_dists);
  out = {c.mean, c.median, c.stddev, d.mean, d.median, d.stddev,
         *std::max_element(mean_dists.begin(), mean_dists.end())};
  return out;
}

}  // namespace casnn::geometry
