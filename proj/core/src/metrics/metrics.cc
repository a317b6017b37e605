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

#include "casnn/metrics/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

#include "casnn/common/error.h"

namespace casnn::metrics {
namespace {

__extension__ using UInt128 = unsigned __int128;

void check_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ContractError("scores and labels differ in length");
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ContractError("labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw ContractError("scores must be finite");
    (labels[i] ? pos : neg) = true;
  }
  if (!pos || !neg) throw ContractError("ROC analysis needs both classes present");
}

// Indices sorted by descending score.
std::vector<std::size_t> descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {}

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> counts)
    : classes_(classes), counts_(std::move(counts)) {
  if (counts_.size() != classes_ * classes_) {
    throw ContractError("confusion matrix needs classes^2 counts");
  }
}

ConfusionMatrix ConfusionMatrix::from_labels(std::span<const int> truth,
                                             std::span<const int> predicted,
                                             std::size_t classes) {
  if (truth.size() != predicted.size()) throw ContractError("label vectors differ in length");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || predicted[i] < 0) throw ContractError("negative class label");
    cm.add(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
  }
  return cm;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= classes_ || predicted >= classes_) throw ContractError("class out of range");
  ++counts_[truth * classes_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t k = 0; k < classes_; ++k) t += at(k, k);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t k = 0; k < classes_; ++k) s += at(truth, k);
  return s;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t k = 0; k < classes_; ++k) s += at(k, predicted);
  return s;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t n = cm.total();
  if (n == 0) throw ContractError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(n);
}

double cohens_kappa(const ConfusionMatrix& cm) {
  const std::uint64_t n = cm.total();
  if (n == 0) throw ContractError("kappa of an empty confusion matrix");
  // kappa = (n * trace - sum r_k c_k) / (n^2 - sum r_k c_k)
  UInt128 chance = 0;
  for (std::size_t k = 0; k < cm.classes(); ++k) {
    chance += static_cast<UInt128>(cm.row_sum(k)) * cm.column_sum(k);
  }
  const UInt128 nn = static_cast<UInt128>(n) * n;
  if (chance == nn) return 0.0;
  const auto observed = static_cast<UInt128>(n) * cm.trace();
  const double num = observed >= chance ? static_cast<double>(observed - chance)
                                        : -static_cast<double>(chance - observed);
  return num / static_cast<double>(nn - chance);
}

double rank_auc(std::span<const double> scores, std::span<const int> labels) {
  check_binary(scores, labels);
  const std::vector<std::size_t> idx = descending(scores);
  // Twice the U statistic: 2 per positive above a negative, 1 per tied pair.
  std::uint64_t twice_u = 0, pos_total = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? pos : neg) += 1;
      ++j;
    }
    twice_u += 2 * pos_total * neg + pos * neg;
    pos_total += pos;
    i = j;
  }
  const std::uint64_t neg_total = labels.size() - pos_total;
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos_total) *
                                         static_cast<double>(neg_total));
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check_binary(scores, labels);
  const std::vector<std::size_t> idx = descending(scores);
  const auto pos_total = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double neg_total = static_cast<double>(labels.size()) - pos_total;
  RocCurve roc;
  roc.points.push_back({0.0, 0.0, INFINITY});
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const double t = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == t) {
      (labels[idx[i]] ? tp : fp) += 1;
      ++i;
    }
    roc.points.push_back({static_cast<double>(fp) / neg_total, static_cast<double>(tp) / pos_total, t});
  }
  roc.auc = rank_auc(scores, labels);
  return roc;
}

double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

ConfusionMatrix read_confusion_csv(std::istream& in) {
  std::vector<std::vector<std::uint64_t>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && !std::isdigit(static_cast<unsigned char>(line[0]))) {
      first = false;
      continue;
    }
    first = false;
    std::vector<std::uint64_t> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      const bool digits_only =
          !cell.empty() && std::all_of(cell.begin(), cell.end(), [](unsigned char ch) {
            return std::isdigit(ch) != 0;
          });
      try {
        if (!digits_only) throw std::invalid_argument(cell);
        const unsigned long long v = std::stoull(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw DataError("bad count '" + cell + "' in confusion matrix");
      }
    }
    rows.push_back(std::move(row));
  }
  const std::size_t k = rows.size();
  if (k == 0) throw DataError("confusion matrix file is empty");
  std::vector<std::uint64_t> counts;
  for (const auto& row : rows) {
    if (row.size() != k) throw DataError("confusion matrix must be square");
    counts.insert(counts.end(), row.begin(), row.end());
  }
  return ConfusionMatrix(k, std::move(counts));
}

nlohmann::json report_json(const ConfusionMatrix& cm, const std::optional<RocCurve>& roc,
                           std::span<const std::string> class_names) {
  nlohmann::json matrix = nlohmann::json::array();
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    std::vector<std::uint64_t> row;
    for (std::size_t p = 0; p < cm.classes(); ++p) row.push_back(cm.at(t, p));
    matrix.push_back(row);
  }
  nlohmann::json j = {{"format", "casnn-evaluation"},
                      {"version", 1},
                      {"confusion_matrix", matrix},
                      {"total", cm.total()},
                      {"accuracy", accuracy(cm)},
                      {"kappa", cohens_kappa(cm)}};
  if (!class_names.empty()) j["classes"] = std::vector<std::string>(class_names.begin(), class_names.end());
  if (roc) {
    nlohmann::json pts = nlohmann::json::array();
    for (const RocPoint& p : roc->points) {
      pts.push_back({{"fpr", p.fpr},
                     {"tpr", p.tpr},
                     {"threshold", std::isfinite(p.threshold) ? nlohmann::json(p.threshold)
                                                              : nlohmann::json("inf")}});
    }
    j["auc"] = roc->auc;
    j["roc"] = pts;
  }
  return j;
}

Image8 render_roc(const RocCurve& roc, std::size_t size) {
  if (size < 8) throw ContractError("ROC plot is too small");
  Image8 img(size, size, 3, 255);
  const double m = static_cast<double>(size - 1);
  const auto plot = [&](double fx, double fy, std::uint8_t v) {
    const auto x = static_cast<std::size_t>(std::lround(fx * m));
    const auto y = static_cast<std::size_t>(std::lround((1.0 - fy) * m));
    for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = v;
  };
  for (std::size_t i = 0; i < size; ++i) {
    const double f = static_cast<double>(i) / m;
    plot(f, f, 170);
  }
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const RocPoint& a = roc.points[i - 1];
    const RocPoint& b = roc.points[i];
    const std::size_t steps = 2 * size;
    for (std::size_t s = 0; s <= steps; ++s) {
      const double u = static_cast<double>(s) / static_cast<double>(steps);
      plot(a.fpr + u * (b.fpr - a.fpr), a.tpr + u * (b.tpr - a.tpr), 0);
    }
  }
  return img;
}

}  // namespace casnn::metrics
