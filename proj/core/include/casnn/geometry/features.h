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

#ifndef CASNN_GEOMETRY_FEATURES_H_
#define CASNN_GEOMETRY_FEATURES_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "casnn/geometry/delaunay.h"
#include "casnn/geometry/label_map.h"

namespace casnn::geometry {

inline constexpr std::size_t kGlobalFeatureCount = 9;
inline constexpr std::size_t kClassFeatureCount = 20;  // 13 Voronoi + 7 Delaunay
inline constexpr std::size_t kFeatureCount = kGlobalFeatureCount + 2 * kClassFeatureCount;
inline constexpr double kMinIdcAreaUm2 = 1500.0;

// Physical cut-offs. Scaling the cell spacing by f together with
// min_idc_area_um2 by f^2 and neighbour_threshold_um by f scales every area
// feature by f^2 and every distance feature by f.
struct FeatureThresholds {
  double min_idc_area_um2 = kMinIdcAreaUm2;
  double neighbour_threshold_um = kNeighbourThresholdUm;
};

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // population
};

// Order-independent: values are sorted before accumulation. Empty input gives
// zeros.
Summary summarize(std::vector<double> values);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  bool operator==(const FeatureVector&) const = default;
};

const std::array<std::string, kFeatureCount>& feature_names();

// Fractions of non-background cells, cancer-relative fractions, IDC hull
// ratio (IDC components below kMinIdcAreaUm2 removed; averaged over tissue
// sections that contain IDC), mean DCIS and IDC component areas.
std::array<double, kGlobalFeatureCount> global_features(const LabelMap& map);
std::array<double, kGlobalFeatureCount> global_features(const LabelMap& map,
                                                        std::vector<Component> dcis,
                                                        std::vector<Component> idc,
                                                        const FeatureThresholds& thresholds = {});

// Components may be passed in any order; small IDC components are dropped
// before the architectural features.
FeatureVector assemble_features(const LabelMap& map, std::vector<Component> dcis,
                                std::vector<Component> idc, std::size_t threads = 1,
                                const FeatureThresholds& thresholds = {});
FeatureVector assemble_features(const LabelMap& map, std::size_t threads = 1,
                                const FeatureThresholds& thresholds = {});

// IDC components at or above the minimum area.
std::vector<Component> surviving_idc(std::vector<Component> idc,
                                     double min_area_um2 = kMinIdcAreaUm2);

struct FeatureRow {
  std::string slide_id;
  int label = -1;
  FeatureVector features;
};

// slide_id,label,<feature names>; values printed round-trip exact.
void write_feature_csv(std::ostream& out, std::span<const FeatureRow> rows);
std::vector<FeatureRow> read_feature_csv(std::istream& in);

}  // namespace casnn::geometry

#endif  // CASNN_GEOMETRY_FEATURES_H_
