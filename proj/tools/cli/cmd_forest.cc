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

// train-forest, classify, evaluate

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include "casnn/common/error.h"
#include "casnn/common/rng.h"
#include "casnn/forest/forest.h"
#include "casnn/geometry/features.h"
#include "casnn/metrics/metrics.h"
#include "context.h"

namespace casnn::cli {
namespace {

enum class Task { kBinary, kThreeClass };

Task task_from_string(const std::string& s) {
  if (s == "binary") return Task::kBinary;
  if (s == "3class") return Task::kThreeClass;
  throw DataError("unknown task '" + s + "'");
}

const char* to_string(Task t) { return t == Task::kBinary ? "binary" : "3class"; }

std::vector<std::string> class_names(Task t) {
  if (t == Task::kBinary) return {"benign", "cancer"};
  return {"benign", "dcis", "idc"};
}

int task_label(Task t, int slide_label) {
  return t == Task::kBinary ? (slide_label > 0 ? 1 : 0) : slide_label;
}

std::uint64_t row_key(const std::string& id) { return derive_seed(0, id); }

std::vector<geometry::FeatureRow> read_features(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  return geometry::read_feature_csv(in);
}

// Feature rows whose slide is in `split`, with labels from the dataset index.
std::vector<geometry::FeatureRow> select_rows(const std::vector<geometry::FeatureRow>& rows,
                                              const std::string& data, const std::string& split) {
  const trainproto::DatasetIndex index = trainproto::load_dataset_index(data);
  std::unordered_map<std::string, const trainproto::SlideRecord*> by_id;
  for (const auto& r : index.slides) by_id[r.id] = &r;
  const bool all = split == "all";
  const trainproto::Split wanted = all ? trainproto::Split::kTrain : trainproto::split_from_string(split);
  std::vector<geometry::FeatureRow> out;
  for (const auto& row : rows) {
    const auto it = by_id.find(row.slide_id);
    if (it == by_id.end()) throw DataError("feature row for unknown slide " + row.slide_id);
    if (!all && it->second->split != wanted) continue;
    geometry::FeatureRow r = row;
    r.label = it->second->label;
    out.push_back(std::move(r));
  }
  if (out.empty()) throw DataError("no feature rows in split '" + split + "'");
  return out;
}

forest::Matrix to_matrix(const std::vector<geometry::FeatureRow>& rows) {
  forest::Matrix x(rows.size(), geometry::kFeatureCount);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].features.values.begin(), rows[i].features.values.end(), x.row(i).begin());
  }
  return x;
}

struct ForestArgs {
  std::string features;
  std::string data;
  std::string out;
  std::string task;
  std::string split = "train";
  bool cv = false;
};

void run_train_forest(RunContext& ctx, const ForestArgs& args) {
  const Task task = task_from_string(args.task);
  const auto rows = select_rows(read_features(args.features), args.data, args.split);
  const forest::Matrix x = to_matrix(rows);
  std::vector<int> y;
  std::vector<std::uint64_t> keys;
  for (const auto& r : rows) {
    y.push_back(task_label(task, r.label));
    keys.push_back(row_key(r.slide_id));
  }
  const nlohmann::json section = ctx.section("forest");
  forest::ForestConfig cfg = forest::forest_config_from_json(section);
  cfg.seed = ctx.stream_seed(std::string("forest-") + to_string(task));
  cfg.threads = ctx.threads;
  nlohmann::json cv_report = nullptr;
  if (args.cv) {
    const nlohmann::json cv = section.value("cv", nlohmann::json::object());
    const auto mults = cv.value("features_multipliers", std::vector<double>{0.5, 1.0, 2.0});
    const auto leaves = cv.value("min_leaves", std::vector<std::size_t>{1, 2, 5});
    const forest::CvResult result =
        forest::cross_validate(x, y, cfg, mults, leaves, cv.value("folds", std::size_t{5}));
    cfg = result.best;
    cv_report = nlohmann::json::array();
    for (std::size_t i = 0; i < result.grid.size(); ++i) {
      cv_report.push_back({{"features_multiplier", result.grid[i].features_multiplier},
                           {"min_leaf", result.grid[i].min_leaf},
                           {"accuracy", result.accuracies[i]}});
    }
  }
  const forest::ForestModel model = forest::train_forest(x, y, cfg, keys);
  nlohmann::json j = forest::forest_to_json(model);
  j["task"] = to_string(task);
  j["class_names"] = class_names(task);
  ensure_parent_dir(args.out);
  {
    std::ofstream out(args.out);
    if (!out) throw DataError("cannot write " + args.out);
    out << j.dump() << '\n';
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "%s forest: %zu rows, oob accuracy %.4f", to_string(task),
                rows.size(), model.oob_accuracy);
  log_line(buf);
  ctx.archive(args.out + ".config.json", {{"features", args.features},
                                          {"data", args.data},
                                          {"split", args.split},
                                          {"task", to_string(task)},
                                          {"forest", forest::to_json(cfg)},
                                          {"cv", cv_report}});
}

struct ClassifyArgs {
  std::string features;
  std::string forest;
  std::string data;
  std::string out;
  std::string split = "test";
};

void run_classify(RunContext& ctx, const ClassifyArgs& args) {
  require_file(args.forest);
  std::ifstream in(args.forest);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(args.forest + ": " + e.what());
  }
  const Task task = task_from_string(j.value("task", std::string("3class")));
  const forest::ForestModel model = forest::forest_from_json(j);
  const auto rows = select_rows(read_features(args.features), args.data, args.split);
  const auto names = class_names(task);
  if (model.n_classes != names.size()) throw DataError(args.forest + ": class count does not match task");
  ensure_parent_dir(args.out);
  std::ofstream out(args.out);
  if (!out) throw DataError("cannot write " + args.out);
  out << "slide_id,truth,predicted";
  for (const auto& n : names) out << ",p_" << n;
  out << '\n';
  for (const auto& r : rows) {
    const std::vector<double> p = model.predict_proba(r.features.values);
    out << r.slide_id << ',' << task_label(task, r.label) << ',' << forest::argmax(p);
    char buf[40];
    for (double v : p) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << '\n';
  }
  log_line("classified " + std::to_string(rows.size()) + " slides (" + to_string(task) + ")");
  ctx.archive(args.out + ".config.json", {{"features", args.features},
                                          {"forest", args.forest},
                                          {"data", args.data},
                                          {"split", args.split}});
}

struct Predictions {
  std::vector<int> truth;
  std::vector<int> predicted;
  std::vector<std::vector<double>> probabilities;
  std::vector<std::string> names;
};

Predictions read_predictions(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty predictions file");
  const auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  const std::vector<std::string> header = split(line);
  if (header.size() < 5 || header[0] != "slide_id" || header[1] != "truth" || header[2] != "predicted") {
    throw DataError(path + ": not a predictions file");
  }
  Predictions p;
  for (std::size_t i = 3; i < header.size(); ++i) p.names.push_back(header[i].substr(2));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw DataError(path + ": ragged row");
    try {
      p.truth.push_back(std::stoi(cells[1]));
      p.predicted.push_back(std::stoi(cells[2]));
      std::vector<double> probs;
      for (std::size_t i = 3; i < cells.size(); ++i) probs.push_back(std::stod(cells[i]));
      p.probabilities.push_back(std::move(probs));
    } catch (const std::exception&) {
      throw DataError(path + ": bad number in row '" + line + "'");
    }
  }
  return p;
}

struct EvaluateArgs {
  std::string predictions;
  std::string confusion;
  std::string out;
  std::string roc_png;
};

void run_evaluate(RunContext& ctx, const EvaluateArgs& args) {
  if (args.predictions.empty() == args.confusion.empty()) {
    throw DataError("evaluate needs exactly one of --predictions or --confusion");
  }
  std::optional<metrics::RocCurve> roc;
  std::vector<std::string> names;
  metrics::ConfusionMatrix cm;
  if (!args.confusion.empty()) {
    require_file(args.confusion);
    std::ifstream in(args.confusion);
    cm = metrics::read_confusion_csv(in);
  } else {
    const Predictions p = read_predictions(args.predictions);
    names = p.names;
    cm = metrics::ConfusionMatrix::from_labels(p.truth, p.predicted, names.size());
    if (names.size() == 2) {
      std::vector<double> scores;
      for (const auto& probs : p.probabilities) scores.push_back(probs[1]);
      roc = metrics::roc_curve(scores, p.truth);
    }
  }
  const nlohmann::json report = metrics::report_json(cm, roc, names);
  if (!args.out.empty()) {
    ensure_parent_dir(args.out);
    std::ofstream out(args.out);
    if (!out) throw DataError("cannot write " + args.out);
    out << report.dump(2) << '\n';
    ctx.archive(args.out + ".config.json",
                {{"predictions", args.predictions}, {"confusion", args.confusion}});
  }
  if (!args.roc_png.empty()) {
    if (!roc) throw DataError("--roc-png needs binary predictions");
    ensure_parent_dir(args.roc_png);
    write_png(args.roc_png, metrics::render_roc(*roc));
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "accuracy %.4f kappa %.4f", metrics::accuracy(cm),
                metrics::cohens_kappa(cm));
  std::cout << buf;
  if (roc) {
    std::snprintf(buf, sizeof buf, " auc %.4f", roc->auc);
    std::cout << buf;
  }
  std::cout << '\n';
}

}  // namespace

void add_forest_commands(CLI::App& app, CommandTable& table) {
  auto fa = std::make_shared<ForestArgs>();
  CLI::App* f = app.add_subcommand("train-forest", "Train a slide-level random forest");
  f->add_option("--features", fa->features, "Feature CSV")->required();
  f->add_option("--data", fa->data, "Dataset directory (labels and splits)")->required();
  f->add_option("--task", fa->task, "binary or 3class")->required()->check(CLI::IsMember({"binary", "3class"}));
  f->add_option("--out", fa->out, "Output forest model")->required();
  f->add_option("--split", fa->split, "Split to train on (train, val, test, all)");
  f->add_flag("--cv", fa->cv, "Select hyperparameters by stratified k-fold search");
  table.add(f, [fa](RunContext& ctx) { run_train_forest(ctx, *fa); });

  auto ca = std::make_shared<ClassifyArgs>();
  CLI::App* c = app.add_subcommand("classify", "Label slides with a trained forest");
  c->add_option("--features", ca->features, "Feature CSV")->required();
  c->add_option("--forest", ca->forest, "Forest model")->required();
  c->add_option("--data", ca->data, "Dataset directory (labels and splits)")->required();
  c->add_option("--out", ca->out, "Output predictions CSV")->required();
  c->add_option("--split", ca->split, "Split to classify (train, val, test, all)");
  table.add(c, [ca](RunContext& ctx) { run_classify(ctx, *ca); });

  auto ea = std::make_shared<EvaluateArgs>();
  CLI::App* e = app.add_subcommand("evaluate", "Accuracy, kappa and ROC/AUC report");
  e->add_option("--predictions", ea->predictions, "Predictions CSV from classify");
  e->add_option("--confusion", ea->confusion, "Confusion matrix CSV");
  e->add_option("--out", ea->out, "Output JSON report");
  e->add_option("--roc-png", ea->roc_png, "Optional ROC plot (binary predictions only)");
  table.add(e, [ea](RunContext& ctx) { run_evaluate(ctx, *ea); });
}

}  // namespace casnn::cli
