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

// train-patch, mine, train-stacked

#include <cstdio>
#include <fstream>

#include "casnn/cascnn/stacked.h"
#include "casnn/common/error.h"
#include "casnn/nn/init.h"
#include "casnn/nn/loss.h"
#include "casnn/trainproto/mining.h"
#include "casnn/trainproto/trainer.h"
#include "context.h"
#include "models.h"

namespace casnn::cli {
namespace {

using trainproto::Split;

struct TrainingData {
  trainproto::DatasetIndex index;
  std::vector<std::string> train_ids;
  std::unique_ptr<trainproto::PatchSampler> train;
  // Null when the dataset has no validation split; `train` is used instead.
  std::unique_ptr<trainproto::PatchSampler> val;

  const trainproto::PatchSampler& validation() const { return val ? *val : *train; }
};

TrainingData load_training_data(const std::string& dir) {
  TrainingData d;
  d.index = trainproto::load_dataset_index(dir);
  const auto train = d.index.with_split(Split::kTrain);
  if (train.empty()) throw DataError(dir + ": dataset has no training slides");
  for (const auto& r : train) d.train_ids.push_back(r.id);
  d.train = std::make_unique<trainproto::PatchSampler>(load_slides(d.index, train));
  const auto val = d.index.with_split(Split::kVal);
  if (!val.empty()) d.val = std::make_unique<trainproto::PatchSampler>(load_slides(d.index, val));
  return d;
}

trainproto::MeanRgb training_mean(const trainproto::PatchSampler& sampler) {
  std::vector<const Image8*> images;
  for (const auto& s : sampler.slides()) images.push_back(&s.image);
  return trainproto::compute_mean_rgb(images);
}

trainproto::TrainLog run_training(nn::Model<float>& model, const TrainingData& data,
                                  const trainproto::MeanRgb& mean,
                                  const trainproto::TrainConfig& cfg, RunContext& ctx,
                                  const std::string& stage) {
  Rng val_rng(ctx.stream_seed(stage + "/validation"));
  const trainproto::ValidationSet val = trainproto::make_validation_set(
      data.validation(), cfg.validation_per_class, cfg.patch_size, mean, val_rng);
  return trainproto::train(model, *data.train, mean, val, cfg, [&](const trainproto::EpochRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s epoch %zu loss %.4f val %.4f lr %.3g patience %zu",
                  stage.c_str(), r.epoch, r.loss, r.accuracy, r.learning_rate, r.patience);
    log_line(buf);
  });
}

void write_log(const std::string& path, const trainproto::TrainLog& log) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  trainproto::write_training_log_csv(out, log);
  log_line("stopped: " + log.stop_reason);
}

struct PatchArgs {
  std::string data;
  std::string out;
};

void run_train_patch(RunContext& ctx, const PatchArgs& args) {
  const TrainingData data = load_training_data(args.data);
  nlohmann::json wrn_json = wrn::to_json(wrn::WrnConfig{});
  wrn_json.merge_patch(ctx.section("wrn"));
  PatchModel model;
  model.config = wrn::wrn_config_from_json(wrn_json);
  model.mean = training_mean(*data.train);
  model.network = wrn::build_wrn<float>(model.config);
  Rng init_rng(ctx.stream_seed("init"));
  nn::initialize_he(model.network, init_rng);

  trainproto::TrainConfig defaults;
  defaults.patch_size = model.config.input_size;
  defaults.batch_size = trainproto::default_batch_size(defaults.patch_size, false);
  defaults.initial_lr = trainproto::kPatchLearningRate;
  trainproto::TrainConfig cfg = trainproto::train_config_from_json(ctx.section("train_patch"), defaults);
  cfg.seed = ctx.stream_seed("train-patch");
  if (cfg.patch_size != model.config.input_size) {
    throw DataError("train_patch.patch_size must equal wrn.input_size");
  }
  const trainproto::TrainLog log = run_training(model.network, data, model.mean, cfg, ctx, "train-patch");
  save_patch_model(args.out, model);
  write_log(args.out + ".log.csv", log);
  ctx.archive(args.out + ".config.json",
              {{"data", args.data}, {"wrn", wrn::to_json(model.config)}, {"train", trainproto::to_json(cfg)}});
}

struct MineArgs {
  std::string data;
  std::string model;
  std::string out;
  std::string regions;
};

void run_mine(RunContext& ctx, const MineArgs& args) {
  TrainingData data = load_training_data(args.data);
  PatchModel model = load_patch_model(args.model);
  const nlohmann::json section = ctx.section("mine");
  trainproto::MiningOptions options;
  options.window = model.config.input_size;
  options.stride = section.value("stride", model.config.input_size);
  options.threads = ctx.threads;
  const cascnn::WindowClassifier classify = [&](const nn::Tensor<float>& w) {
    return model.network.probabilities(w);
  };
  const std::vector<trainproto::Region> regions =
      trainproto::hard_negative_mine(classify, *data.train, model.mean, options);
  std::uint64_t area = 0;
  for (const auto& r : regions) area += r.area();
  log_line("mined " + std::to_string(regions.size()) + " false-positive regions (" +
           std::to_string(area) + " px)");
  const std::string regions_path = args.regions.empty() ? args.out + ".regions.json" : args.regions;
  ensure_parent_dir(regions_path);
  {
    std::ofstream out(regions_path);
    if (!out) throw DataError("cannot write " + regions_path);
    out << trainproto::regions_to_json(regions, data.train_ids).dump(1) << '\n';
  }
  data.train->add_benign_regions(regions);

  trainproto::TrainConfig defaults;
  defaults.patch_size = model.config.input_size;
  defaults.batch_size = trainproto::default_batch_size(defaults.patch_size, false);
  defaults.initial_lr = trainproto::kPatchLearningRate * trainproto::kLearningRateDecay;
  defaults.max_epochs = 20;
  trainproto::TrainConfig cfg = trainproto::train_config_from_json(section.value("train", nlohmann::json::object()), defaults);
  cfg.seed = ctx.stream_seed("mine");
  trainproto::TrainLog log;
  if (cfg.max_epochs > 0) log = run_training(model.network, data, model.mean, cfg, ctx, "mine");
  save_patch_model(args.out, model, {{"mined_regions", regions.size()}});
  write_log(args.out + ".log.csv", log);
  ctx.archive(args.out + ".config.json", {{"data", args.data},
                                          {"model", args.model},
                                          {"regions", regions_path},
                                          {"stride", options.stride},
                                          {"train", trainproto::to_json(cfg)}});
}

struct StackedArgs {
  std::string data;
  std::string base;
  std::string out;
  std::string regions;
  std::size_t window = 512;
};

void run_train_stacked(RunContext& ctx, const StackedArgs& args) {
  TrainingData data = load_training_data(args.data);
  if (!args.regions.empty()) {
    require_file(args.regions);
    std::ifstream in(args.regions);
    data.train->add_benign_regions(trainproto::regions_from_json(nlohmann::json::parse(in), data.train_ids));
  }
  PatchModel base = load_patch_model(args.base);
  base.network.set_trainable(false);
  cascnn::StackedConfig scfg;
  scfg.training_patch_size = args.window;
  scfg.window_stride = ctx.section("train_stacked").value("window_stride", scfg.window_stride);
  cascnn::validate(scfg);
  Rng init_rng(ctx.stream_seed("init-top"));
  StackedModel model;
  model.mean = base.mean;
  model.network = std::make_unique<cascnn::StackedNetwork<float>>(
      cascnn::build_stacked(std::move(base.network), base.config, scfg, init_rng));

  trainproto::TrainConfig defaults;
  defaults.patch_size = args.window;
  defaults.batch_size = trainproto::default_batch_size(args.window, true);
  defaults.initial_lr = trainproto::kStackedLearningRate;
  nlohmann::json section = ctx.section("train_stacked");
  section.erase("window_stride");
  trainproto::TrainConfig cfg = trainproto::train_config_from_json(section, defaults);
  cfg.seed = ctx.stream_seed("train-stacked");
  if (cfg.patch_size != args.window) throw DataError("train_stacked.patch_size must equal --window");
  const trainproto::TrainLog log = run_training(*model.network, data, model.mean, cfg, ctx, "train-stacked");
  save_stacked_model(args.out, model);
  write_log(args.out + ".log.csv", log);
  ctx.archive(args.out + ".config.json", {{"data", args.data},
                                          {"base", args.base},
                                          {"regions", args.regions},
                                          {"stacked", cascnn::to_json(scfg)},
                                          {"train", trainproto::to_json(cfg)}});
}

}  // namespace

void add_train_commands(CLI::App& app, CommandTable& table) {
  auto patch = std::make_shared<PatchArgs>();
  CLI::App* p = app.add_subcommand("train-patch", "Train the patch-level WRN");
  p->add_option("--data", patch->data, "Dataset directory")->required();
  p->add_option("--out", patch->out, "Output weight file")->required();
  table.add(p, [patch](RunContext& ctx) { run_train_patch(ctx, *patch); });

  auto mine = std::make_shared<MineArgs>();
  CLI::App* m = app.add_subcommand("mine", "Hard-negative mining round and fine-tuning");
  m->add_option("--data", mine->data, "Dataset directory")->required();
  m->add_option("--model", mine->model, "Patch model weight file")->required();
  m->add_option("--out", mine->out, "Output weight file")->required();
  m->add_option("--regions-out", mine->regions, "Where to write mined regions");
  table.add(m, [mine](RunContext& ctx) { run_mine(ctx, *mine); });

  auto stacked = std::make_shared<StackedArgs>();
  CLI::App* s = app.add_subcommand("train-stacked", "Train the stacked network on a frozen base");
  s->add_option("--data", stacked->data, "Dataset directory")->required();
  s->add_option("--base", stacked->base, "Patch model weight file")->required();
  s->add_option("--out", stacked->out, "Output weight file")->required();
  s->add_option("--regions", stacked->regions, "Mined region file to add to the benign pool");
  s->add_option("--window", stacked->window, "Training window")
      ->check(CLI::IsMember({512, 768, 1024}));
  table.add(s, [stacked](RunContext& ctx) { run_train_stacked(ctx, *stacked); });
}

}  // namespace casnn::cli
