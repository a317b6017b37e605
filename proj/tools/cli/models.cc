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

#include "models.h"

#include "casnn/common/error.h"
#include "casnn/nn/weights_io.h"
#include "context.h"

namespace casnn::cli {
namespace {

nn::WeightBundle<float> load_bundle(const std::string& path, const char* kind) {
  require_file(path);
  nn::WeightBundle<float> bundle = nn::load_weights<float>(path);
  if (bundle.meta.value("kind", std::string()) != kind) {
    throw DataError(path + ": expected a '" + kind + "' weight file");
  }
  return bundle;
}

}  // namespace

void save_patch_model(const std::string& path, const PatchModel& model,
                      const nlohmann::json& extra) {
  nlohmann::json meta = extra;
  meta["kind"] = kPatchKind;
  meta["wrn"] = wrn::to_json(model.config);
  meta["mean_rgb"] = trainproto::mean_to_json(model.mean);
  ensure_parent_dir(path);
  nn::save_weights<float>(path, {{"wrn", &model.network}}, meta);
}

PatchModel load_patch_model(const std::string& path) {
  nn::WeightBundle<float> bundle = load_bundle(path, kPatchKind);
  PatchModel model;
  model.config = wrn::wrn_config_from_json(bundle.meta.at("wrn"));
  model.mean = trainproto::mean_from_json(bundle.meta.at("mean_rgb"));
  model.network = std::move(bundle.get("wrn"));
  return model;
}

void save_stacked_model(const std::string& path, const StackedModel& model,
                        const nlohmann::json& extra) {
  nlohmann::json meta = extra;
  meta["kind"] = kStackedKind;
  meta["wrn"] = wrn::to_json(model.network->base_config());
  meta["stacked"] = cascnn::to_json(model.network->config());
  meta["mean_rgb"] = trainproto::mean_to_json(model.mean);
  ensure_parent_dir(path);
  nn::save_weights<float>(path, {{"base", &model.network->base()}, {"top", &model.network->top()}},
                          meta);
}

StackedModel load_stacked_model(const std::string& path) {
  nn::WeightBundle<float> bundle = load_bundle(path, kStackedKind);
  const wrn::WrnConfig base_config = wrn::wrn_config_from_json(bundle.meta.at("wrn"));
  const cascnn::StackedConfig config = cascnn::stacked_config_from_json(bundle.meta.at("stacked"));
  cascnn::validate(config);
  nn::Network<float> base = std::move(bundle.get("base"));
  base.set_trainable(false);
  StackedModel model;
  model.mean = trainproto::mean_from_json(bundle.meta.at("mean_rgb"));
  model.network = std::make_unique<cascnn::StackedNetwork<float>>(
      std::move(base), base_config, std::move(bundle.get("top")), config);
  return model;
}

}  // namespace casnn::cli
