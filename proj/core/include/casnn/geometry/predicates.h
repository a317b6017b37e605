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

#ifndef CASNN_GEOMETRY_PREDICATES_H_
#define CASNN_GEOMETRY_PREDICATES_H_

namespace casnn::geometry {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Exact signs: a floating-point evaluation with a forward error bound, and an
// exact rational fallback when the bound cannot certify the sign.
// orient2d > 0 when a, b, c turn counter-clockwise.
int orient2d(const Point& a, const Point& b, const Point& c);
// incircle > 0 when d lies strictly inside the circle through the
// counter-clockwise triangle a, b, c.
int incircle(const Point& a, const Point& b, const Point& c, const Point& d);

}  // namespace casnn::geometry

#endif  // CASNN_GEOMETRY_PREDICATES_H_
