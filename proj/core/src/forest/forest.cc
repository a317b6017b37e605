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

#include "casnn/forest/forest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "casnn/common/error.h"
#include "casnn/common/parallel.h"
#include "casnn/common/rng.h"

namespace casnn::forest {
namespace {

struct Item {
  std::uint32_t row;
  std::uint32_t weight;
};

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
};

double weighted_gini(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
  // total * gini = total - sum c^2 / total
  double sq = 0.0;
  for (std::uint64_t c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
  return static_cast<double>(total) - sq / static_cast<double>(total);
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> labels, std::size_t n_classes,
              std::size_t candidates, std::size_t min_leaf, Rng& rng)
      : x_(x), labels_(labels), n_classes_(n_classes), candidates_(candidates),
        min_leaf_(min_leaf), rng_(rng) {}

  Tree build(std::vector<Item> items) {
    Tree tree;
    struct Task {
      std::size_t node;
      std::size_t begin;
      std::size_t end;
    };
    items_ = std::move(items);
    tree.nodes.emplace_back();
    std::vector<Task> queue{{0, 0, items_.size()}};
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const Task task = queue[q];
      const Split split = best_split(task.begin, task.end);
      if (!split.found) {
        tree.nodes[task.node].histogram = histogram(task.begin, task.end);
        continue;
      }
      const auto mid = std::stable_partition(
          items_.begin() + static_cast<std::ptrdiff_t>(task.begin),
          items_.begin() + static_cast<std::ptrdiff_t>(task.end), [&](const Item& it) {
            return x_.at(it.row, split.feature) <= split.threshold;
          });
      const auto split_at = static_cast<std::size_t>(mid - items_.begin());
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      Node& node = tree.nodes[task.node];
      node.feature = static_cast<std::int32_t>(split.feature);
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      queue.push_back({static_cast<std::size_t>(left), task.begin, split_at});
      queue.push_back({static_cast<std::size_t>(left + 1), split_at, task.end});
    }
    return tree;
  }

 private:
  std::vector<std::uint32_t> histogram(std::size_t begin, std::size_t end) const {
    std::vector<std::uint32_t> h(n_classes_, 0);
    for (std::size_t i = begin; i < end; ++i) {
      h[static_cast<std::size_t>(labels_[items_[i].row])] += items_[i].weight;
    }
    return h;
  }

  Split best_split(std::size_t begin, std::size_t end) {
    const std::vector<std::uint32_t> h = histogram(begin, end);
    const std::uint64_t total = std::accumulate(h.begin(), h.end(), std::uint64_t{0});
    const auto nonzero = std::count_if(h.begin(), h.end(), [](std::uint32_t c) { return c > 0; });
    Split best;
    if (nonzero <= 1 || total < 2 * min_leaf_ || total < 2) return best;

    // Fresh feature permutation per node; the first `candidates_` are
    // evaluated, later ones only until some feature admits a split.
    std::vector<std::size_t> order(x_.cols);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng_, order.size() - i));
      std::swap(order[i], order[j]);
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k >= candidates_ && best.found) break;
      evaluate_feature(order[k], begin, end, total, best);
    }
    return best;
  }

  void evaluate_feature(std::size_t f, std::size_t begin, std::size_t end, std::uint64_t total,
                        Split& best) {
    sorted_.assign(items_.begin() + static_cast<std::ptrdiff_t>(begin),
                   items_.begin() + static_cast<std::ptrdiff_t>(end));
    std::stable_sort(sorted_.begin(), sorted_.end(), [&](const Item& a, const Item& b) {
      return x_.at(a.row, f) < x_.at(b.row, f);
    });
    std::vector<std::uint64_t> left(n_classes_, 0);
    std::vector<std::uint64_t> right(n_classes_, 0);
    for (const Item& it : sorted_) right[static_cast<std::size_t>(labels_[it.row])] += it.weight;
    std::uint64_t n_left = 0;
    for (std::size_t i = 0; i + 1 < sorted_.size(); ++i) {
      const auto cls = static_cast<std::size_t>(labels_[sorted_[i].row]);
      left[cls] += sorted_[i].weight;
      right[cls] -= sorted_[i].weight;
      n_left += sorted_[i].weight;
      const double a = x_.at(sorted_[i].row, f);
      const double b = x_.at(sorted_[i + 1].row, f);
      if (!(a < b)) continue;
      const std::uint64_t n_right = total - n_left;
      if (n_left < min_leaf_ || n_right < min_leaf_) continue;
      const double score = weighted_gini(left, n_left) + weighted_gini(right, n_right);
      if (score < best.score || (score == best.score && best.found && f < best.feature)) {
        double t = a + (b - a) / 2.0;
        if (!(t < b)) t = a;
        best = {true, f, t, score};
      }
    }
  }

  const Matrix& x_;
  std::span<const int> labels_;
  std::size_t n_classes_;
  std::size_t candidates_;
  std::size_t min_leaf_;
  Rng& rng_;
  std::vector<Item> items_;
  std::vector<Item> sorted_;
};

std::string format_threshold(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  return buf;
}

double parse_threshold(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw DataError("bad threshold '" + s + "' in forest model");
  }
  return v;
}

}  // namespace

nlohmann::json to_json(const ForestConfig& c) {
  return {{"n_trees", c.n_trees},
          {"seed", c.seed},
          {"features_multiplier", c.features_multiplier},
          {"min_leaf", c.min_leaf}};
}

ForestConfig forest_config_from_json(const nlohmann::json& j, ForestConfig c) {
  try {
    c.n_trees = j.value("n_trees", c.n_trees);
    c.seed = j.value("seed", c.seed);
    c.features_multiplier = j.value("features_multiplier", c.features_multiplier);
    c.min_leaf = j.value("min_leaf", c.min_leaf);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad forest config: ") + e.what());
  }
  if (c.n_trees == 0 || c.min_leaf == 0 || !(c.features_multiplier > 0.0)) {
    throw DataError("forest config needs n_trees, min_leaf and features_multiplier > 0");
  }
  return c;
}

std::size_t candidate_feature_count(std::size_t n_features, double multiplier) {
  const double m = std::ceil(multiplier * std::sqrt(static_cast<double>(n_features)));
  return std::clamp<std::size_t>(static_cast<std::size_t>(m), 1, n_features);
}

const Node& Tree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature != kLeaf) {
    const Node& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                       : n.right);
  }
  return nodes[i];
}

std::vector<double> ForestModel::predict_proba(std::span<const double> x) const {
  if (x.size() != n_features) {
    throw ContractError("feature vector has " + std::to_string(x.size()) + " values, model expects " +
                        std::to_string(n_features));
  }
  if (trees.empty()) throw ContractError("forest has no trees");
  std::vector<double> p(n_classes, 0.0);
  for (const Tree& tree : trees) {
    const Node& leaf = tree.leaf_for(x);
    const double total = std::accumulate(leaf.histogram.begin(), leaf.histogram.end(), 0.0);
    for (std::size_t k = 0; k < n_classes; ++k) p[k] += leaf.histogram[k] / total;
  }
  for (double& v : p) v /= static_cast<double>(trees.size());
  return p;
}

int ForestModel::predict(std::span<const double> x) const { return argmax(predict_proba(x)); }

int argmax(std::span<const double> p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

ForestModel train_forest(const Matrix& x, std::span<const int> labels, const ForestConfig& config,
                         std::span<const std::uint64_t> keys) {
  const std::size_t n = x.rows;
  if (labels.size() != n) throw ContractError("label count does not match feature rows");
  if (!keys.empty() && keys.size() != n) throw ContractError("key count does not match rows");
  if (n == 0 || x.cols == 0) throw ContractError("empty training set");
  if (config.n_trees == 0 || config.min_leaf == 0) throw ContractError("bad forest config");
  for (double v : x.values) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value in training set");
  }
  int max_label = 0;
  for (int y : labels) {
    if (y < 0) throw DataError("negative class label");
    max_label = std::max(max_label, y);
  }
  std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
  for (int y : labels) seen[static_cast<std::size_t>(y)] = true;
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw DataError("forest training needs at least two classes");
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  if (!keys.empty()) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
  }

  ForestModel model;
  model.n_classes = static_cast<std::size_t>(max_label) + 1;
  model.n_features = x.cols;
  model.config = config;
  model.trees.resize(config.n_trees);
  std::vector<std::vector<std::uint32_t>> weights(config.n_trees);
  const std::size_t candidates = candidate_feature_count(x.cols, config.features_multiplier);
  const std::uint64_t root = derive_seed(config.seed, "bootstrap");

  parallel_for(config.n_trees, config.threads, [&](std::size_t t) {
    Rng rng(derive_seed(root, static_cast<std::uint64_t>(t)));
    std::vector<std::uint32_t>& w = weights[t];
    w.assign(n, 0);
    for (std::size_t d = 0; d < n; ++d) ++w[uniform_index(rng, n)];
    std::vector<Item> items;
    for (std::size_t pos = 0; pos < n; ++pos) {
      if (w[pos] > 0) items.push_back({order[pos], w[pos]});
    }
    TreeBuilder builder(x, labels, model.n_classes, candidates, config.min_leaf, rng);
    model.trees[t] = builder.build(std::move(items));
  });

  std::vector<std::vector<double>> oob(n, std::vector<double>(model.n_classes, 0.0));
  std::vector<std::size_t> oob_trees(n, 0);
  for (std::size_t t = 0; t < config.n_trees; ++t) {
    for (std::size_t pos = 0; pos < n; ++pos) {
      if (weights[t][pos] > 0) continue;
      const std::uint32_t row = order[pos];
      const Node& leaf = model.trees[t].leaf_for(x.row(row));
      const double total = std::accumulate(leaf.histogram.begin(), leaf.histogram.end(), 0.0);
      for (std::size_t k = 0; k < model.n_classes; ++k) oob[row][k] += leaf.histogram[k] / total;
      ++oob_trees[row];
    }
  }
  std::size_t hits = 0, counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (oob_trees[i] == 0) continue;
    ++counted;
    if (argmax(oob[i]) == labels[i]) ++hits;
  }
  model.oob_accuracy = counted ? static_cast<double>(hits) / static_cast<double>(counted)
                               : std::numeric_limits<double>::quiet_NaN();
  return model;
}

nlohmann::json forest_to_json(const ForestModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& node : tree.nodes) {
      if (node.feature == kLeaf) {
        nodes.push_back({{"h", node.histogram}});
      } else {
        nodes.push_back({{"f", node.feature},
                         {"t", format_threshold(node.threshold)},
                         {"l", node.left},
                         {"r", node.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  nlohmann::json oob = nullptr;
  if (std::isfinite(model.oob_accuracy)) oob = format_threshold(model.oob_accuracy);
  return {{"format", "casnn-forest"},    {"version", 1},
          {"n_classes", model.n_classes}, {"n_features", model.n_features},
          {"config", to_json(model.config)}, {"oob_accuracy", oob},
          {"trees", trees}};
}

ForestModel forest_from_json(const nlohmann::json& j) {
  ForestModel model;
  try {
    if (j.at("format").get<std::string>() != "casnn-forest") {
      throw DataError("not a forest model file");
    }
    model.n_classes = j.at("n_classes").get<std::size_t>();
    model.n_features = j.at("n_features").get<std::size_t>();
    model.config = forest_config_from_json(j.at("config"));
    const auto& oob = j.at("oob_accuracy");
    model.oob_accuracy = oob.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                       : parse_threshold(oob.get<std::string>());
    for (const auto& jt : j.at("trees")) {
      Tree tree;
      for (const auto& jn : jt) {
        Node node;
        if (jn.contains("h")) {
          node.histogram = jn.at("h").get<std::vector<std::uint32_t>>();
          if (node.histogram.size() != model.n_classes ||
              std::accumulate(node.histogram.begin(), node.histogram.end(), 0ull) == 0) {
            throw DataError("forest leaf histogram is malformed");
          }
        } else {
          node.feature = jn.at("f").get<std::int32_t>();
          node.threshold = parse_threshold(jn.at("t").get<std::string>());
          node.left = jn.at("l").get<std::int32_t>();
          node.right = jn.at("r").get<std::int32_t>();
        }
        tree.nodes.push_back(std::move(node));
      }
      const auto size = static_cast<std::int32_t>(tree.nodes.size());
      for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const Node& n = tree.nodes[i];
        if (n.feature == kLeaf) continue;
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= model.n_features ||
            n.left <= static_cast<std::int32_t>(i) || n.right <= static_cast<std::int32_t>(i) ||
            n.left >= size || n.right >= size) {
          throw DataError("forest tree structure is malformed");
        }
      }
      if (tree.nodes.empty()) throw DataError("forest tree has no nodes");
      model.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed forest model: ") + e.what());
  }
  model.config.n_trees = model.trees.size();
  return model;
}

void save_forest(const std::string& path, const ForestModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << forest_to_json(model).dump() << '\n';
}

ForestModel load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return forest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

CvResult cross_validate(const Matrix& x, std::span<const int> labels, const ForestConfig& base,
                        std::span<const double> multipliers,
                        std::span<const std::size_t> min_leaves, std::size_t folds) {
  if (folds < 2) throw ContractError("cross-validation needs at least two folds");
  const std::size_t n = x.rows;
  std::vector<std::size_t> fold(n, 0);
  Rng rng(derive_seed(base.seed, "cv"));
  const int max_label = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  for (int cls = 0; cls <= max_label; ++cls) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == cls) rows.push_back(i);
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      std::swap(rows[i], rows[i + static_cast<std::size_t>(uniform_index(rng, rows.size() - i))]);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) fold[rows[i]] = i % folds;
  }

  CvResult result;
  double best_accuracy = -1.0;
  for (double mult : multipliers) {
    for (std::size_t leaf : min_leaves) {
      ForestConfig cfg = base;
      cfg.features_multiplier = mult;
      cfg.min_leaf = leaf;
      std::size_t hits = 0, total = 0;
      for (std::size_t k = 0; k < folds; ++k) {
        Matrix train_x(0, x.cols);
        std::vector<int> train_y;
        for (std::size_t i = 0; i < n; ++i) {
          if (fold[i] == k) continue;
          train_x.values.insert(train_x.values.end(), x.row(i).begin(), x.row(i).end());
          ++train_x.rows;
          train_y.push_back(labels[i]);
        }
        const ForestModel model = train_forest(train_x, train_y, cfg);
        for (std::size_t i = 0; i < n; ++i) {
          if (fold[i] != k) continue;
          ++total;
          const std::vector<double> p = model.predict_proba(x.row(i));
          if (argmax(p) == labels[i]) ++hits;
        }
      }
      const double acc = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
      result.grid.push_back(cfg);
      result.accuracies.push_back(acc);
      if (acc > best_accuracy) {
        best_accuracy = acc;
        result.best = cfg;
      }
    }
  }
  return result;
}

}  // namespace casnn::forest
