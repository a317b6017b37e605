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

#ifndef CASNN_TOOLS_CLI_MODELS_H_
#define CASNN_TOOLS_CLI_MODELS_H_

#include <memory>
#include <string>

#include "casnn/cascnn/stacked.h"
#include "casnn/nn/network.h"
#include "casnn/trainproto/preprocess.h"
#include "casnn/wrn/wrn.h"

namespace casnn::cli {

inline constexpr const char* kPatchKind = "wrn";
inline constexpr const char* kStackedKind = "cascnn";

struct PatchModel {
  nn::Network<float> network;
  wrn::WrnConfig config;
  trainproto::MeanRgb mean{};
};

// StackedNetwork has no empty state; the pointer is always set once loaded.
struct StackedModel {
  std::unique_ptr<cascnn::StackedNetwork<float>> network;
  trainproto::MeanRgb mean{};
};

void save_patch_model(const std::string& path, const PatchModel& model,
                      const nlohmann::json& extra = nlohmann::json::object());
PatchModel load_patch_model(const std::string& path);

void save_stacked_model(const std::string& path, const StackedModel& model,
                        const nlohmann::json& extra = nlohmann::json::object());
StackedModel load_stacked_model(const std::string& path);

}  // namespace casnn::cli

#endif  // CASNN_TOOLS_CLI_MODELS_H_
