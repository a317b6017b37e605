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

#include "casnn/trainproto/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "casnn/common/error.h"
#include "casnn/nn/loss.h"
#include "casnn/nn/optimizer.h"
#include "casnn/trainproto/augment.h"

namespace casnn::trainproto {

std::size_t default_batch_size(std::size_t patch_size, bool stacked) {
  if (!stacked) return 22;
  return patch_size >= 1024 ? 10 : 18;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"patch_size", c.patch_size},
          {"batch_size", c.batch_size},
          {"initial_lr", c.initial_lr},
          {"momentum", c.momentum},
          {"batches_per_epoch", c.batches_per_epoch},
          {"max_epochs", c.max_epochs},
          {"min_lr", c.min_lr},
          {"validation_per_class", c.validation_per_class},
          {"augment", c.augment},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  try {
    c.patch_size = j.value("patch_size", c.patch_size);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.initial_lr = j.value("initial_lr", c.initial_lr);
    c.momentum = j.value("momentum", c.momentum);
    c.batches_per_epoch = j.value("batches_per_epoch", c.batches_per_epoch);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.min_lr = j.value("min_lr", c.min_lr);
    c.validation_per_class = j.value("validation_per_class", c.validation_per_class);
    c.augment = j.value("augment", c.augment);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad training config: ") + e.what());
  }
  if (c.batch_size == 0 || c.batches_per_epoch == 0 || c.patch_size == 0) {
    throw DataError("training config sizes must be positive");
  }
  if (!(c.initial_lr > 0.0) || c.momentum < 0.0 || c.momentum >= 1.0) {
    throw DataError("training config needs lr > 0 and momentum in [0, 1)");
  }
  return c;
}

ValidationSet make_validation_set(const PatchSampler& sampler, std::size_t per_class,
                                  std::size_t patch_size, const MeanRgb& mean, Rng& rng) {
  ValidationSet set;
  const std::size_t n = per_class * kNumClasses;
  set.patches = nn::Tensor<float>({n, 3, patch_size, patch_size});
  set.labels.reserve(n);
  std::size_t i = 0;
  for (int cls = 0; cls < static_cast<int>(kNumClasses); ++cls) {
    for (std::size_t k = 0; k < per_class; ++k, ++i) {
      const auto [patch, label] = sampler.sample_patch(cls, patch_size, rng);
      preprocess_into(patch, mean, set.patches.sample(i));
      set.labels.push_back(label);
    }
  }
  return set;
}

double balanced_accuracy(const nn::Model<float>& model, const ValidationSet& set,
                         std::size_t batch_size) {
  const std::size_t n = set.labels.size();
  if (n == 0) throw ContractError("empty validation set");
  std::array<std::size_t, kNumClasses> hits{};
  std::array<std::size_t, kNumClasses> totals{};
  for (std::size_t first = 0; first < n; first += batch_size) {
    const std::size_t count = std::min(batch_size, n - first);
    const nn::Tensor<float> logits = model.infer(nn::slice_batch(set.patches, first, count));
    const std::size_t classes = logits.shape().c;
    for (std::size_t i = 0; i < count; ++i) {
      const float* row = logits.sample(i);
      const auto pred = static_cast<int>(std::max_element(row, row + classes) - row);
      const auto truth = static_cast<std::size_t>(set.labels[first + i]);
      ++totals[truth];
      if (pred == set.labels[first + i]) ++hits[truth];
    }
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (totals[c] == 0) continue;
    sum += static_cast<double>(hits[c]) / static_cast<double>(totals[c]);
    ++present;
  }
  return sum / static_cast<double>(present);
}

void draw_batch(const PatchSampler& sampler, const MeanRgb& mean, std::size_t patch_size,
                bool do_augment, Rng& rng, nn::Tensor<float>& batch, std::vector<int>& labels) {
  const std::size_t n = batch.shape().n;
  if (batch.shape() != nn::Shape{n, 3, patch_size, patch_size}) {
    throw ContractError("batch tensor has the wrong shape");
  }
  labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int cls = sampler.draw_class(rng);
    auto [patch, label] = sampler.sample_patch(cls, patch_size, rng);
    if (do_augment) patch = augment(patch, draw_augment(rng));
    preprocess_into(patch, mean, batch.sample(i));
    labels[i] = label;
  }
}

TrainLog train(nn::Model<float>& model, const PatchSampler& sampler, const MeanRgb& mean,
               const ValidationSet& validation, const TrainConfig& config,
               const std::function<void(const EpochRecord&)>& on_epoch) {
  Rng rng(derive_seed(config.seed, "sampling"));
  nn::NesterovSgd<float> sgd(model.trainable_parameters(), config.initial_lr, config.momentum);
  ScheduleState schedule = initial_schedule(config.initial_lr);
  nn::Tensor<float> batch({config.batch_size, 3, config.patch_size, config.patch_size});
  std::vector<int> labels;
  TrainLog log;
  for (std::size_t epoch = 1;; ++epoch) {
    if (epoch > config.max_epochs) {
      log.stop_reason = "max_epochs";
      break;
    }
    if (schedule.learning_rate < config.min_lr) {
      log.stop_reason = "min_lr";
      break;
    }
    sgd.set_learning_rate(schedule.learning_rate);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < config.batches_per_epoch; ++b) {
      draw_batch(sampler, mean, config.patch_size, config.augment, rng, batch, labels);
      sgd.lookahead();
      const nn::Tensor<float> logits = model.forward(batch);
      const nn::LossResult<float> loss = nn::softmax_cross_entropy(logits, std::span<const int>(labels));
      if (!std::isfinite(loss.loss)) throw ContractError("training loss diverged");
      model.backward(loss.grad);
      sgd.step();
      loss_sum += loss.loss;
    }
    EpochRecord record;
    record.epoch = epoch;
    record.loss = loss_sum / static_cast<double>(config.batches_per_epoch);
    record.accuracy = balanced_accuracy(model, validation, config.batch_size);
    record.learning_rate = schedule.learning_rate;
    record.patience = schedule.patience;
    log.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
    schedule = schedule_step(schedule, record.accuracy);
  }
  return log;
}

void write_training_log_csv(std::ostream& out, const TrainLog& log) {
  out << "epoch,loss,accuracy,learning_rate,patience\n";
  char buf[160];
  for (const EpochRecord& r : log.epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%zu\n", r.epoch, r.loss, r.accuracy,
                  r.learning_rate, r.patience);
    out << buf;
  }
}

}  // namespace casnn::trainproto
