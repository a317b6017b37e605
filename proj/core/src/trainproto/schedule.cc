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

#include "casnn/trainproto/schedule.h"

namespace casnn::trainproto {

ScheduleState initial_schedule(double learning_rate) {
  ScheduleState s;
  s.learning_rate = learning_rate;
  return s;
}

ScheduleState schedule_step(const ScheduleState& state, double validation_accuracy) {
  ScheduleState next = state;
  if (validation_accuracy > state.best_validation_accuracy) {
    next.best_validation_accuracy = validation_accuracy;
    next.epochs_since_improvement = 0;
    return next;
  }
  ++next.epochs_since_improvement;
  if (next.epochs_since_improvement >= next.patience) {
    next.learning_rate *= kLearningRateDecay;
    next.patience = grow_patience(next.patience);
    next.epochs_since_improvement = 0;
  }
  return next;
}

}  // namespace casnn::trainproto
