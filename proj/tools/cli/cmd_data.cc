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

// synth, features

#include <filesystem>
#include <fstream>

#include "casnn/cascnn/dense.h"
#include "casnn/common/error.h"
#include "casnn/geometry/features.h"
#include "casnn/geometry/label_map.h"
#include "casnn/synthgen/synthgen.h"
#include "context.h"

namespace casnn::cli {
namespace {

struct SynthArgs {
  std::string out;
  std::optional<std::size_t> slides_per_class;
  std::optional<std::size_t> image_size;
};

void run_synth(RunContext& ctx, const SynthArgs& args) {
  synthgen::SynthConfig cfg = synthgen::synth_config_from_json(ctx.section("synth"));
  if (args.slides_per_class) cfg.slides_per_class = *args.slides_per_class;
  if (args.image_size) cfg.image_size = *args.image_size;
  cfg.seed = ctx.stream_seed("synth");
  cfg.threads = ctx.threads;
  const trainproto::DatasetIndex index = synthgen::generate(cfg, args.out);
  ctx.archive((std::filesystem::path(args.out) / "synth.config.json").string(),
              synthgen::to_json(cfg));
  log_line("wrote " + std::to_string(index.slides.size()) + " slides to " + args.out);
}

struct FeatureArgs {
  std::string data;
  std::string maps;
  std::string out;
};

void run_features(RunContext& ctx, const FeatureArgs& args) {
  const trainproto::DatasetIndex index = trainproto::load_dataset_index(args.data);
  if (!std::filesystem::is_directory(args.maps)) throw DataError("missing input: " + args.maps);
  std::vector<geometry::FeatureRow> rows;
  for (const trainproto::SlideRecord& r : index.slides) {
    const std::string path = (std::filesystem::path(args.maps) / (r.id + ".probmap")).string();
    if (!std::filesystem::exists(path)) continue;
    const cascnn::ProbabilityMap map = cascnn::load_probability_map(path);
    const geometry::LabelMap labels = geometry::argmax_label_map(map, map.tissue);
    rows.push_back({r.id, r.label, geometry::assemble_features(labels, ctx.threads)});
  }
  if (rows.empty()) throw DataError("no probability maps found in " + args.maps);
  ensure_parent_dir(args.out);
  std::ofstream out(args.out);
  if (!out) throw DataError("cannot write " + args.out);
  geometry::write_feature_csv(out, rows);
  ctx.archive(args.out + ".config.json", {{"data", args.data}, {"maps", args.maps}});
  log_line("wrote features for " + std::to_string(rows.size()) + " slides to " + args.out);
}

}  // namespace

void add_data_commands(CLI::App& app, CommandTable& table) {
  auto synth = std::make_shared<SynthArgs>();
  CLI::App* s = app.add_subcommand("synth", "Generate a synthetic slide dataset");
  s->add_option("--out", synth->out, "Output dataset directory")->required();
  s->add_option("--slides-per-class", synth->slides_per_class, "Slides per class");
  s->add_option("--size", synth->image_size, "Slide width and height in pixels");
  table.add(s, [synth](RunContext& ctx) { run_synth(ctx, *synth); });

  auto feat = std::make_shared<FeatureArgs>();
  CLI::App* f = app.add_subcommand("features", "Extract slide feature vectors from maps");
  f->add_option("--data", feat->data, "Dataset directory")->required();
  f->add_option("--maps", feat->maps, "Directory of .probmap files")->required();
  f->add_option("--out", feat->out, "Output feature CSV")->required();
  table.add(f, [feat](RunContext& ctx) { run_features(ctx, *feat); });
}

}  // namespace casnn::cli
