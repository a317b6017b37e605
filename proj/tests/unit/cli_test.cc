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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "casnn/cascnn/dense.h"
#include "casnn/common/rng.h"
#include "casnn/geometry/features.h"
#include "casnn/trainproto/dataset.h"
#include "context.h"

namespace casnn::cli {
namespace {

namespace fs = std::filesystem;

const std::string kReference = std::string(CASNN_TEST_DATA_DIR) + "/reference_confusion.csv";

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "casnn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string run_capture(std::vector<std::string> args, int& code) {
  ::testing::internal::CaptureStdout();
  code = run(std::move(args));
  return ::testing::internal::GetCapturedStdout();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("casnn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, EvaluateReferenceConfusion) {
  int code = -1;
  const std::string out =
      run_capture({"evaluate", "--confusion", kReference, "--out", path("report.json")}, code);
  EXPECT_EQ(code, 0);
  EXPECT_EQ(out, "accuracy 0.8125 kappa 0.6998\n");
  std::ifstream in(path("report.json"));
  const auto report = nlohmann::json::parse(in);
  EXPECT_EQ(report["total"], 64);
  EXPECT_NEAR(report["kappa"].get<double>(), 0.700, 0.0005);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"evaluate", "--confusion", path("missing.csv")}), 2);
  EXPECT_EQ(run({"evaluate"}), 2);
  EXPECT_EQ(run({"no-such-command"}), 1);
  EXPECT_EQ(run({"evaluate", "--confusion"}), 1);
  std::ofstream(path("bad.csv")) << "1,2\n3\n";
  EXPECT_EQ(run({"evaluate", "--confusion", path("bad.csv")}), 2);
}

TEST_F(CliTest, InstalledBinaryReportsExitStatus) {
  const std::string tool = CASNN_TOOL_PATH;
  const std::string ok = tool + " evaluate --confusion " + kReference + " > " + path("out.txt");
  EXPECT_EQ(WEXITSTATUS(std::system(ok.c_str())), 0);
  std::ifstream in(path("out.txt"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "accuracy 0.8125 kappa 0.6998");
  const std::string bad = tool + " evaluate --confusion " + path("none.csv") + " 2> /dev/null";
  EXPECT_EQ(WEXITSTATUS(std::system(bad.c_str())), 2);
}

// Hand-written dataset: an index plus probability maps whose lesion content
// follows the slide label, driven through features, forests and evaluation.
TEST_F(CliTest, FeatureForestClassifyEvaluate) {
  trainproto::DatasetIndex index;
  index.root = dir_.string();
  Rng rng(1);
  fs::create_directories(dir_ / "maps");
  for (int i = 0; i < 36; ++i) {
    const int label = i % 3;
    const std::string id = "s" + std::to_string(i);
    index.slides.push_back({id, id + ".png", id + "_mask.png",
                            i < 24 ? trainproto::Split::kTrain : trainproto::Split::kTest, label});
    cascnn::ProbabilityMap map;
    map.rows = map.cols = 12;
    map.window = 512;
    map.stride = 224;
    map.tissue.assign(144, 1);
    map.probabilities.assign(144 * 3, 0.0f);
    for (std::size_t c = 0; c < 144; ++c) {
      int k = 0;
      const double u = uniform01(rng);
      if (label == 1 && u < 0.15) k = 1;
      if (label == 2 && u < 0.3) k = 2;
      map.probabilities[c * 3 + k] = 1.0f;
    }
    cascnn::save_probability_map((dir_ / "maps" / (id + ".probmap")).string(), map);
  }
  trainproto::save_dataset_index(dir_.string(), index);
  std::ofstream(path("cfg.json")) << R"({"forest": {"n_trees": 32}})";

  const std::string cfg = path("cfg.json");
  ASSERT_EQ(run({"--config", cfg, "features", "--data", dir_.string(), "--maps", path("maps"),
                 "--out", path("features.csv")}),
            0);
  std::ifstream fin(path("features.csv"));
  EXPECT_EQ(geometry::read_feature_csv(fin).size(), 36u);
  for (const std::string task : {"3class", "binary"}) {
    ASSERT_EQ(run({"--config", cfg, "train-forest", "--features", path("features.csv"), "--data",
                   dir_.string(), "--task", task, "--out", path(task + ".json")}),
              0);
    ASSERT_EQ(run({"--config", cfg, "classify", "--features", path("features.csv"), "--forest",
                   path(task + ".json"), "--data", dir_.string(), "--out", path(task + ".csv")}),
              0);
  }
  int code = -1;
  const std::string three = run_capture({"evaluate", "--predictions", path("3class.csv")}, code);
  EXPECT_EQ(code, 0);
  EXPECT_EQ(three.rfind("accuracy 1.0000", 0), 0u) << three;
  const std::string binary = run_capture(
      {"evaluate", "--predictions", path("binary.csv"), "--roc-png", path("roc.png")}, code);
  EXPECT_EQ(code, 0);
  EXPECT_NE(binary.find("auc 1.0000"), std::string::npos) << binary;
  EXPECT_TRUE(fs::exists(path("roc.png")));
  EXPECT_TRUE(fs::exists(path("binary.json.config.json")));

  // Same seed and inputs: byte-identical forest.
  ASSERT_EQ(run({"--config", cfg, "train-forest", "--features", path("features.csv"), "--data",
                 dir_.string(), "--task", "binary", "--out", path("again.json")}),
            0);
  std::ifstream a(path("binary.json")), b(path("again.json"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(CliTest, SynthWritesLoadableDataset) {
  ASSERT_EQ(run({"--seed", "3", "synth", "--out", path("data"), "--slides-per-class", "2",
                 "--size", "256"}),
            0);
  const auto index = trainproto::load_dataset_index(path("data"));
  EXPECT_EQ(index.slides.size(), 6u);
  EXPECT_NO_THROW(trainproto::load_slide(index, index.slides.front()));
  EXPECT_TRUE(fs::exists(path("data/synth.config.json")));
}

}  // namespace
}  // namespace casnn::cli
