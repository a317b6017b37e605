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

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "casnn/common/rng.h"
#include "casnn/metrics/metrics.h"
#include "support/oracles.h"

namespace casnn::metrics {
namespace {

ConfusionMatrix reference_matrix() {
  std::ifstream in(std::string(CASNN_TEST_DATA_DIR) + "/reference_confusion.csv");
  return read_confusion_csv(in);
}

void random_scores(Rng& rng, std::size_t n, std::vector<double>& s, std::vector<int>& y) {
  s.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(uniform_index(rng, 2));
    // Coarse grid: plenty of tied scores, including across classes.
    s[i] = std::floor(uniform01(rng) * 12 + 0.25 * y[i]) / 12.0;
  }
  y[0] = 0;
  y[1] = 1;
}

TEST(ConfusionTest, ReferenceMatrixAccuracyAndKappa) {
  const auto start = std::chrono::steady_clock::now();
  const ConfusionMatrix cm = reference_matrix();
  const double acc = accuracy(cm);
  const double kappa = cohens_kappa(cm);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_EQ(cm.total(), 64u);
  EXPECT_DOUBLE_EQ(acc, 0.8125);
  EXPECT_NEAR(kappa, 0.700, 0.0005);
  EXPECT_NEAR(kappa, testing::kappa_by_definition(cm), 1e-12);
  EXPECT_LT(std::chrono::duration<double>(elapsed).count(), 1e-3);
}

TEST(ConfusionTest, KappaMatchesDefinitionOnRandomMatrices) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + uniform_index(rng, 4);
    std::vector<std::uint64_t> counts(k * k);
    for (auto& c : counts) c = uniform_index(rng, 30);
    counts[0] += 1;
    counts[1] += 1;  // p_e < 1
    const ConfusionMatrix cm(k, counts);
    EXPECT_NEAR(cohens_kappa(cm), testing::kappa_by_definition(cm), 1e-12);
  }
}

TEST(ConfusionTest, KappaEdgeCases) {
  EXPECT_DOUBLE_EQ(cohens_kappa(ConfusionMatrix(2, {5, 0, 0, 7})), 1.0);
  EXPECT_EQ(cohens_kappa(ConfusionMatrix(2, {9, 0, 0, 0})), 0.0);  // p_e = 1
  // Independent raters: chance agreement only.
  EXPECT_NEAR(cohens_kappa(ConfusionMatrix(2, {25, 25, 25, 25})), 0.0, 1e-15);
  EXPECT_LT(cohens_kappa(ConfusionMatrix(2, {0, 5, 5, 0})), 0.0);
}

TEST(ConfusionTest, FromLabelsAndMargins) {
  const std::vector<int> truth{0, 0, 1, 2, 2, 2};
  const std::vector<int> pred{0, 1, 1, 2, 0, 2};
  const ConfusionMatrix cm = ConfusionMatrix::from_labels(truth, pred, 3);
  EXPECT_EQ(cm.at(0, 1), 1u);
  EXPECT_EQ(cm.trace(), 4u);
  EXPECT_EQ(cm.row_sum(2), 3u);
  EXPECT_EQ(cm.column_sum(0), 2u);
  EXPECT_ANY_THROW(ConfusionMatrix::from_labels(truth, std::vector<int>{0, 1, 1, 2, 0, 3}, 3));
}

TEST(ConfusionTest, CsvParsing) {
  std::istringstream no_header("1,2\n3,4\n");
  EXPECT_EQ(read_confusion_csv(no_header), ConfusionMatrix(2, {1, 2, 3, 4}));
  std::istringstream ragged("1,2\n3\n");
  EXPECT_ANY_THROW(read_confusion_csv(ragged));
  std::istringstream rectangular("1,2,3\n4,5,6\n");
  EXPECT_ANY_THROW(read_confusion_csv(rectangular));
  std::istringstream negative("1,-2\n3,4\n");
  EXPECT_ANY_THROW(read_confusion_csv(negative));
}

TEST(AucTest, FourPointExample) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(rank_auc(s, y), 0.75);
  EXPECT_DOUBLE_EQ(roc_curve(s, y).auc, 0.75);
}

TEST(AucTest, RankEqualsTrapezoidAndPairwise) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    random_scores(rng, 5 + uniform_index(rng, 200), s, y);
    const RocCurve roc = roc_curve(s, y);
    EXPECT_NEAR(rank_auc(s, y), trapezoid_area(roc.points), 1e-12) << trial;
    EXPECT_NEAR(rank_auc(s, y), testing::pairwise_auc(s, y), 1e-12) << trial;
  }
}

TEST(AucTest, InvariantToIncreasingTransform) {
  Rng rng(3);
  std::vector<double> s;
  std::vector<int> y;
  random_scores(rng, 150, s, y);
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = std::exp(3 * s[i]) - 7;
  EXPECT_EQ(rank_auc(s, y), rank_auc(t, y));
  const RocCurve a = roc_curve(s, y), b = roc_curve(t, y);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].fpr, b.points[i].fpr);
    EXPECT_EQ(a.points[i].tpr, b.points[i].tpr);
  }
}

TEST(AucTest, CurveShape) {
  const std::vector<double> s{0.9, 0.9, 0.5, 0.2};
  const std::vector<int> y{1, 0, 1, 0};
  const RocCurve roc = roc_curve(s, y);
  ASSERT_EQ(roc.points.size(), 4u);
  EXPECT_TRUE(std::isinf(roc.points[0].threshold));
  EXPECT_EQ(roc.points.front().fpr, 0.0);
  EXPECT_EQ(roc.points.back().tpr, 1.0);
  EXPECT_EQ(roc.points.back().fpr, 1.0);
  EXPECT_DOUBLE_EQ(roc.points[1].tpr, 0.5);
  EXPECT_DOUBLE_EQ(roc.points[1].fpr, 0.5);
  EXPECT_DOUBLE_EQ(roc.auc, 0.625);
}

TEST(AucTest, RejectsSingleClassOrBadLabels) {
  EXPECT_ANY_THROW(rank_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}));
  EXPECT_ANY_THROW(rank_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 2}));
  EXPECT_ANY_THROW(rank_auc(std::vector<double>{0.1}, std::vector<int>{0, 1}));
}

TEST(ReportTest, JsonFieldsAndRocImage) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> y{0, 0, 1, 1};
  const RocCurve roc = roc_curve(s, y);
  const std::vector<std::string> names{"benign", "cancer"};
  const auto j = report_json(ConfusionMatrix(2, {1, 1, 0, 2}), roc, names);
  EXPECT_EQ(j["format"], "casnn-evaluation");
  EXPECT_EQ(j["total"], 4);
  EXPECT_DOUBLE_EQ(j["accuracy"].get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(j["auc"].get<double>(), 0.75);
  EXPECT_EQ(j["roc"][0]["threshold"], "inf");
  EXPECT_EQ(j["classes"][1], "cancer");
  EXPECT_FALSE(report_json(ConfusionMatrix(2, {1, 0, 0, 1}), std::nullopt).contains("auc"));
  const Image8 img = render_roc(roc, 64);
  EXPECT_EQ(img.width, 64u);
  EXPECT_EQ(img.height, 64u);
  EXPECT_EQ(img.at(0, 63, 0), 0);   // curve starts at the origin (bottom-left)
  EXPECT_EQ(img.at(63, 0, 0), 0);   // and ends at (1, 1) (top-right)
  EXPECT_EQ(img.at(60, 63, 0), 255);
}

}  // namespace
}  // namespace casnn::metrics
