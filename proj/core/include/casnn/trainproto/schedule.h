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

#ifndef CASNN_TRAINPROTO_SCHEDULE_H_
#define CASNN_TRAINPROTO_SCHEDULE_H_

#include <cstddef>
#include <limits>

namespace casnn::trainproto {

inline constexpr double kLearningRateDecay = 0.2;
inline constexpr std::size_t kInitialPatience = 8;
inline constexpr double kPatchLearningRate = 0.05;
inline constexpr double kStackedLearningRate = 0.005;

struct ScheduleState {
  double learning_rate = kPatchLearningRate;
  std::size_t patience = kInitialPatience;
  std::size_t epochs_since_improvement = 0;
  double best_validation_accuracy = -std::numeric_limits<double>::infinity();
  bool operator==(const ScheduleState&) const = default;
};

ScheduleState initial_schedule(double learning_rate);

// ceil(1.2 * p) in integer arithmetic.
constexpr std::size_t grow_patience(std::size_t p) { return (6 * p + 4) / 5; }

// A strictly better accuracy resets the counter; otherwise the counter grows,
// and on reaching the patience the rate is multiplied by 0.2, the patience
// grows by 20% (rounded up) and the counter resets.
ScheduleState schedule_step(const ScheduleState& state, double validation_accuracy);

}  // namespace casnn::trainproto

#endif  // CASNN_TRAINPROTO_SCHEDULE_H_
