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

#ifndef CASNN_METRICS_METRICS_H_
#define CASNN_METRICS_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "casnn/common/image.h"

namespace casnn::metrics {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0);
  ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts);

  static ConfusionMatrix from_labels(std::span<const int> truth, std::span<const int> predicted,
                                     std::size_t classes);

  std::size_t classes() const { return classes_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_ + predicted];
  }
  void add(std::size_t truth, std::size_t predicted);
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t column_sum(std::size_t predicted) const;
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

double accuracy(const ConfusionMatrix& cm);

// (p_o - p_e) / (1 - p_e) evaluated from exact integer sums; 0 when p_e = 1.
double cohens_kappa(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // a score >= threshold is called positive
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1)
  double auc = 0.0;              // rank statistic
};

// Mann-Whitney U / (P * N) with tied pairs counting one half.
double rank_auc(std::span<const double> scores, std::span<const int> labels);

// One point per distinct score (descending) plus the (0, 0) origin.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

double trapezoid_area(std::span<const RocPoint> points);

// Reads a square matrix of non-negative counts, one row per line, comma
// separated. A first line that does not start with a digit is a header.
ConfusionMatrix read_confusion_csv(std::istream& in);

nlohmann::json report_json(const ConfusionMatrix& cm, const std::optional<RocCurve>& roc,
                           std::span<const std::string> class_names = {});

// White canvas, gray diagonal, black curve.
Image8 render_roc(const RocCurve& roc, std::size_t size = 256);

}  // namespace casnn::metrics

#endif  // CASNN_METRICS_METRICS_H_
