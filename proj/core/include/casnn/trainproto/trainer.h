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

#ifndef CASNN_TRAINPROTO_TRAINER_H_
#define CASNN_TRAINPROTO_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "casnn/nn/network.h"
#include "casnn/trainproto/preprocess.h"
#include "casnn/trainproto/sampler.h"
#include "casnn/trainproto/schedule.h"

namespace casnn::trainproto {

// Default batch sizes: 22 for the patch network; 18 and 10 for stacked
// windows of 512/768 and 1024 pixels.
std::size_t default_batch_size(std::size_t patch_size, bool stacked);

struct TrainConfig {
  std::size_t patch_size = 224;
  std::size_t batch_size = 22;
  double initial_lr = kPatchLearningRate;
  double momentum = 0.9;
  std::size_t batches_per_epoch = 100;
  std::size_t max_epochs = 200;
  double min_lr = 1e-6;
  std::size_t validation_per_class = 50;
  bool augment = true;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;            // mean training loss over the epoch
  double accuracy = 0.0;        // balanced validation accuracy
  double learning_rate = 0.0;   // rate used during the epoch
  std::size_t patience = 0;     // patience in force during the epoch
  bool operator==(const EpochRecord&) const = default;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::string stop_reason;
};

// Fixed, seeded, unaugmented patches with equal counts per class.
struct ValidationSet {
  nn::Tensor<float> patches;
  std::vector<int> labels;
};

ValidationSet make_validation_set(const PatchSampler& sampler, std::size_t per_class,
                                  std::size_t patch_size, const MeanRgb& mean, Rng& rng);

// Mean per-class recall of argmax predictions.
double balanced_accuracy(const nn::Model<float>& model, const ValidationSet& set,
                         std::size_t batch_size);

// Draws a class-balanced, optionally augmented, preprocessed batch.
void draw_batch(const PatchSampler& sampler, const MeanRgb& mean, std::size_t patch_size,
                bool augment, Rng& rng, nn::Tensor<float>& batch, std::vector<int>& labels);

// Nesterov SGD over class-balanced batches. After each epoch the schedule is
// stepped with the validation accuracy; training stops when the rate falls
// below min_lr or after max_epochs.
TrainLog train(nn::Model<float>& model, const PatchSampler& sampler, const MeanRgb& mean,
               const ValidationSet& validation, const TrainConfig& config,
               const std::function<void(const EpochRecord&)>& on_epoch = {});

void write_training_log_csv(std::ostream& out, const TrainLog& log);

}  // namespace casnn::trainproto

#endif  // CASNN_TRAINPROTO_TRAINER_H_
