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

// predict

#include <chrono>
#include <filesystem>

#include "casnn/cascnn/dense.h"
#include "casnn/common/error.h"
#include "casnn/trainproto/dataset.h"
#include "context.h"
#include "models.h"

namespace casnn::cli {
namespace {

struct PredictArgs {
  std::string data;
  std::string image;
  std::string model;
  std::string out;
  std::string split = "all";
  double pixel_spacing_um = 1.0;
};

cascnn::ProbabilityMap predict_image(const StackedModel& model, const Image8& image,
                                     double spacing, bool skip_background, std::size_t threads) {
  if (image.channels != 3) throw DataError("prediction needs an RGB image");
  const cascnn::StackedConfig& cfg = model.network->config();
  cascnn::DenseOptions options;
  options.threads = threads;
  options.pixel_spacing_um = spacing;
  options.tissue = cascnn::cell_tissue_flags(cascnn::tissue_pixels(image), image.width, image.height,
                                             cfg.training_patch_size, cfg.window_stride);
  options.skip_background = skip_background;
  return cascnn::dense_predict(*model.network, trainproto::preprocess(image, model.mean), cfg, options);
}

void write_outputs(const std::string& dir, const std::string& id, const cascnn::ProbabilityMap& map) {
  const std::filesystem::path base = std::filesystem::path(dir) / id;
  cascnn::save_probability_map(base.string() + ".probmap", map);
  write_png(base.string() + ".png", cascnn::render_heatmap(map));
}

void run_predict(RunContext& ctx, const PredictArgs& args) {
  if (args.data.empty() == args.image.empty()) {
    throw DataError("predict needs exactly one of --data or --image");
  }
  const StackedModel model = load_stacked_model(args.model);
  const bool skip = ctx.section("predict").value("skip_background", true);
  std::filesystem::create_directories(args.out);
  nlohmann::json settings = {{"model", args.model}, {"skip_background", skip}};
  if (!args.image.empty()) {
    require_file(args.image);
    const std::string id = std::filesystem::path(args.image).stem().string();
    write_outputs(args.out, id,
                  predict_image(model, read_png(args.image), args.pixel_spacing_um, skip, ctx.threads));
    settings["image"] = args.image;
    settings["pixel_spacing_um"] = args.pixel_spacing_um;
  } else {
    const trainproto::DatasetIndex index = trainproto::load_dataset_index(args.data);
    std::vector<trainproto::SlideRecord> records = index.slides;
    if (args.split != "all") records = index.with_split(trainproto::split_from_string(args.split));
    std::size_t done = 0;
    for (const auto& r : records) {
      const auto t0 = std::chrono::steady_clock::now();
      const trainproto::Slide slide = trainproto::load_slide(index, r);
      write_outputs(args.out, r.id,
                    predict_image(model, slide.image, index.pixel_spacing_um, skip, ctx.threads));
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log_line("predicted " + r.id + " (" + std::to_string(++done) + "/" +
               std::to_string(records.size()) + ", " + std::to_string(s) + " s)");
    }
    settings["data"] = args.data;
    settings["split"] = args.split;
  }
  ctx.archive((std::filesystem::path(args.out) / "predict.config.json").string(), settings);
}

}  // namespace

void add_predict_commands(CLI::App& app, CommandTable& table) {
  auto args = std::make_shared<PredictArgs>();
  CLI::App* p = app.add_subcommand("predict", "Dense probability maps and heatmaps");
  p->add_option("--data", args->data, "Dataset directory");
  p->add_option("--image", args->image, "Single RGB PNG instead of a dataset");
  p->add_option("--model", args->model, "Stacked model weight file")->required();
  p->add_option("--out", args->out, "Output directory")->required();
  p->add_option("--split", args->split, "train, val, test or all")
      ->check(CLI::IsMember({"all", "train", "val", "test"}));
  p->add_option("--pixel-spacing", args->pixel_spacing_um, "Micrometres per pixel for --image");
  table.add(p, [args](RunContext& ctx) { run_predict(ctx, *args); });
}

}  // namespace casnn::cli
