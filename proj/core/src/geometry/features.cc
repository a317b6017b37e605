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

#include "casnn/geometry/features.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "casnn/common/error.h"
#include "casnn/geometry/delaunay.h"
#include "casnn/geometry/voronoi.h"

namespace casnn::geometry {
namespace {

struct IntPoint {
  long long x;
  long long y;
  auto operator<=>(const IntPoint&) const = default;
};

long long cross(const IntPoint& o, const IntPoint& a, const IntPoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Twice the area of the convex hull of the corners of `cells`.
long long hull_area2(const std::vector<Cell>& cells) {
  std::vector<IntPoint> pts;
  pts.reserve(cells.size() * 4);
  for (const Cell& c : cells) {
    for (int dr = 0; dr <= 1; ++dr) {
      for (int dc = 0; dc <= 1; ++dc) pts.push_back({c.col + dc, c.row + dr});
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0;
  std::vector<IntPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const IntPoint& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  long long area2 = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const IntPoint& a = hull[i];
    const IntPoint& b = hull[(i + 1) % hull.size()];
    area2 += a.x * b.y - b.x * a.y;
  }
  return area2 < 0 ? -area2 : area2;
}

std::vector<Point> seeds_of(const std::vector<Component>& comps) {
  std::vector<Point> seeds;
  seeds.reserve(comps.size());
  for (const Component& c : comps) seeds.push_back({c.centroid_col, c.centroid_row});
  return seeds;
}

std::array<std::string, kFeatureCount> make_names() {
  std::array<std::string, kFeatureCount> names;
  std::size_t i = 0;
  for (const char* g : {"frac_benign", "frac_dcis", "frac_idc", "frac_cancer", "dcis_of_cancer",
                        "idc_of_cancer", "idc_hull_ratio", "mean_dcis_area_um2",
                        "mean_idc_area_um2"}) {
    names[i++] = g;
  }
  for (const char* cls : {"dcis_", "idc_"}) {
    for (const char* metric : {"vor_area", "vor_ecc", "vor_tissue_ratio", "vor_lesion_ratio"}) {
      for (const char* stat : {"_mean", "_median", "_std"}) {
        names[i++] = std::string(cls) + metric + stat;
      }
    }
    names[i++] = std::string(cls) + "vor_largest_area";
    for (const char* metric : {"dt_nbr_count", "dt_nbr_dist"}) {
      for (const char* stat : {"_mean", "_median", "_std"}) {
        names[i++] = std::string(cls) + metric + stat;
      }
    }
    names[i++] = std::string(cls) + "dt_max_avg_dist";
  }
  return names;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  const std::size_t m = values.size() / 2;
  s.median = values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
  std::vector<double> sq;
  sq.reserve(values.size());
  for (double v : values) sq.push_back((v - s.mean) * (v - s.mean));
  std::sort(sq.begin(), sq.end());
  double ss = 0.0;
  for (double v : sq) ss += v;
  s.stddev = std::sqrt(ss / n);
  return s;
}

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = make_names();
  return names;
}

std::vector<Component> surviving_idc(std::vector<Component> idc, double min_area_um2) {
  std::erase_if(idc, [min_area_um2](const Component& c) { return c.area_um2 < min_area_um2; });
  return idc;
}

std::array<double, kGlobalFeatureCount> global_features(const LabelMap& map) {
  return global_features(map, connected_components(map, kDcis), connected_components(map, kIdc));
}

std::array<double, kGlobalFeatureCount> global_features(const LabelMap& map,
                                                        std::vector<Component> dcis,
                                                        std::vector<Component> idc,
                                                        const FeatureThresholds& thresholds) {
  std::size_t counts[4] = {0, 0, 0, 0};
  for (std::uint8_t v : map.labels) {
    if (v > kIdc) throw ContractError("label map value " + std::to_string(v) + " out of range");
    ++counts[v];
  }
  const std::size_t tissue = counts[kBenign] + counts[kDcis] + counts[kIdc];
  if (tissue == 0) throw ContractError("global features need at least one non-background cell");
  const double t = static_cast<double>(tissue);
  const std::size_t cancer = counts[kDcis] + counts[kIdc];
  std::array<double, kGlobalFeatureCount> out{};
  out[0] = static_cast<double>(counts[kBenign]) / t;
  out[1] = static_cast<double>(counts[kDcis]) / t;
  out[2] = static_cast<double>(counts[kIdc]) / t;
  out[3] = static_cast<double>(cancer) / t;
  out[4] = cancer ? static_cast<double>(counts[kDcis]) / static_cast<double>(cancer) : 0.0;
  out[5] = cancer ? static_cast<double>(counts[kIdc]) / static_cast<double>(cancer) : 0.0;

  // Hull ratio per tissue section holding surviving IDC, averaged.
  const std::vector<Component> kept = surviving_idc(idc, thresholds.min_idc_area_um2);
  if (!kept.empty()) {
    std::vector<std::int32_t> section(map.rows * map.cols, -1);
    const auto sections = label_regions(
        map.rows, map.cols, [&](std::size_t i) { return map.labels[i] != kBackground; });
    for (std::size_t s = 0; s < sections.size(); ++s) {
      for (const Cell& c : sections[s]) {
        section[static_cast<std::size_t>(c.row) * map.cols + static_cast<std::size_t>(c.col)] =
            static_cast<std::int32_t>(s);
      }
    }
    std::vector<std::vector<Cell>> idc_by_section(sections.size());
    for (const Component& comp : kept) {
      const Cell& first = comp.cells.front();
      const auto s = section[static_cast<std::size_t>(first.row) * map.cols +
                             static_cast<std::size_t>(first.col)];
      auto& bucket = idc_by_section[static_cast<std::size_t>(s)];
      bucket.insert(bucket.end(), comp.cells.begin(), comp.cells.end());
    }
    std::vector<double> ratios;
    for (const auto& cells : idc_by_section) {
      if (cells.empty()) continue;
      const long long area2 = hull_area2(cells);
      ratios.push_back(area2 > 0 ? 2.0 * static_cast<double>(cells.size()) /
                                       static_cast<double>(area2)
                                 : 0.0);
    }
    out[6] = summarize(ratios).mean;
  }

  std::vector<double> areas;
  for (const Component& c : dcis) areas.push_back(c.area_um2);
  out[7] = summarize(areas).mean;
  areas.clear();
  for (const Component& c : idc) areas.push_back(c.area_um2);
  out[8] = summarize(areas).mean;
  return out;
}

FeatureVector assemble_features(const LabelMap& map, std::size_t threads,
                                const FeatureThresholds& thresholds) {
  return assemble_features(map, connected_components(map, kDcis),
                           connected_components(map, kIdc), threads, thresholds);
}

FeatureVector assemble_features(const LabelMap& map, std::vector<Component> dcis,
                                std::vector<Component> idc, std::size_t threads,
                                const FeatureThresholds& thresholds) {
  FeatureVector fv;
  const auto global = global_features(map, dcis, idc, thresholds);
  std::copy(global.begin(), global.end(), fv.values.begin());
  std::size_t offset = kGlobalFeatureCount;
  for (std::vector<Component>* comps : {&dcis, &idc}) {
    std::vector<Component> seeds_from =
        comps == &idc ? surviving_idc(*comps, thresholds.min_idc_area_um2) : *comps;
    sort_components(seeds_from);
    if (!seeds_from.empty()) {
      const std::vector<Point> seeds = seeds_of(seeds_from);
      const auto vor = voronoi_features(area_voronoi(map, seeds, threads), seeds_from, map);
      const auto del =
          delaunay_features(seeds, map.cell_spacing_um, thresholds.neighbour_threshold_um);
      std::copy(vor.begin(), vor.end(), fv.values.begin() + static_cast<long>(offset));
      std::copy(del.begin(), del.end(),
                fv.values.begin() + static_cast<long>(offset + kVoronoiFeatureCount));
    }
    offset += kClassFeatureCount;
  }
  return fv;
}

void write_feature_csv(std::ostream& out, std::span<const FeatureRow> rows) {
  out << "slide_id,label";
  for (const std::string& name : feature_names()) out << ',' << name;
  out << '\n';
  for (const FeatureRow& row : rows) {
    out << row.slide_id << ',' << row.label;
    for (double v : row.features.values) out << ',' << format_double(v);
    out << '\n';
  }
}

std::vector<FeatureRow> read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("feature CSV is empty");
  const auto header = split_csv(line);
  if (header.size() != kFeatureCount + 2 || header[0] != "slide_id" || header[1] != "label") {
    throw DataError("feature CSV header does not match the " + std::to_string(kFeatureCount) +
                    "-feature layout");
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (header[i + 2] != feature_names()[i]) {
      throw DataError("feature CSV column " + std::to_string(i + 2) + " is '" + header[i + 2] +
                      "', expected '" + feature_names()[i] + "'");
    }
  }
  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != kFeatureCount + 2) {
      throw DataError("feature CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields");
    }
    FeatureRow row;
    row.slide_id = fields[0];
    auto parse = [&](const std::string& f, auto& value) {
      const auto res = std::from_chars(f.data(), f.data() + f.size(), value);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw DataError("feature CSV line " + std::to_string(line_no) + ": bad number '" + f +
                        "'");
      }
    };
    parse(fields[1], row.label);
    for (std::size_t i = 0; i < kFeatureCount; ++i) parse(fields[i + 2], row.features.values[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace casnn::geometry
