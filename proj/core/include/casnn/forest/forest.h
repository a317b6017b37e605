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

#ifndef CASNN_FOREST_FOREST_H_
#define CASNN_FOREST_FOREST_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace casnn::forest {

// Dense row-major feature matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

inline constexpr std::int32_t kLeaf = -1;

// Internal nodes send x[feature] <= threshold to `left`. Leaves carry the
// class counts of the (bootstrap-weighted) training samples that reached them.
struct Node {
  std::int32_t feature = kLeaf;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::uint32_t> histogram;
  bool operator==(const Node&) const = default;
};

struct Tree {
  std::vector<Node> nodes;  // nodes[0] is the root
  bool operator==(const Tree&) const = default;

  const Node& leaf_for(std::span<const double> x) const;
};

struct ForestConfig {
  std::size_t n_trees = 512;
  std::uint64_t seed = 0;
  // Candidate features per node: ceil(multiplier * sqrt(d)), clamped to [1, d].
  double features_multiplier = 1.0;
  std::size_t min_leaf = 1;
  std::size_t threads = 1;
};

nlohmann::json to_json(const ForestConfig& config);
ForestConfig forest_config_from_json(const nlohmann::json& j, ForestConfig defaults = {});

std::size_t candidate_feature_count(std::size_t n_features, double multiplier);

struct ForestModel {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  ForestConfig config;
  std::vector<Tree> trees;
  // Out-of-bag accuracy from training; NaN when no row was ever out of bag.
  double oob_accuracy = 0.0;

  std::vector<double> predict_proba(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
};

// Fits config.n_trees CART trees, each on n draws with replacement. Tree t
// draws from its own stream derive_seed(derive_seed(seed, "bootstrap"), t),
// and rows are visited in `keys` order (row index when empty), so the model
// is independent of row order whenever keys are distinct. Labels are
// 0..n_classes-1 with n_classes = max label + 1.
ForestModel train_forest(const Matrix& x, std::span<const int> labels,
                         const ForestConfig& config, std::span<const std::uint64_t> keys = {});

// Ties resolve to the lowest class.
int argmax(std::span<const double> probabilities);

// Thresholds are stored as "%.17g" strings so a round trip is exact.
nlohmann::json forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const nlohmann::json& j);
void save_forest(const std::string& path, const ForestModel& model);
ForestModel load_forest(const std::string& path);

struct CvResult {
  ForestConfig best;
  // One entry per grid point, in grid order.
  std::vector<ForestConfig> grid;
  std::vector<double> accuracies;
};

// Stratified k-fold grid search over features_multiplier x min_leaf. Folds
// are assigned from derive_seed(base.seed, "cv").
CvResult cross_validate(const Matrix& x, std::span<const int> labels, const ForestConfig& base,
                        std::span<const double> multipliers, std::span<const std::size_t> min_leaves,
                        std::size_t folds = 5);

}  // namespace casnn::forest

#endif  // CASNN_FOREST_FOREST_H_
