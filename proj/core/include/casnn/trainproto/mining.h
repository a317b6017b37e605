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

#ifndef CASNN_TRAINPROTO_MINING_H_
#define CASNN_TRAINPROTO_MINING_H_

#include <cstddef>
#include <vector>

#include "casnn/cascnn/dense.h"
#include "casnn/trainproto/preprocess.h"
#include "casnn/trainproto/sampler.h"

namespace casnn::trainproto {

// One region per 8-connected component of tissue cells predicted DCIS or
// IDC: the bounding rectangle of the component's windows.
std::vector<Region> false_positive_regions(const cascnn::ProbabilityMap& map,
                                           std::size_t slide);

struct MiningOptions {
  std::size_t window = 224;
  std::size_t stride = 224;
  std::size_t threads = 1;
};

// Dense-predicts every benign slide in `sampler` (slide label benign) and
// returns all false-positive regions. Existing annotations are untouched.
std::vector<Region> hard_negative_mine(const cascnn::WindowClassifier& classify,
                                       const PatchSampler& sampler, const MeanRgb& mean,
                                       const MiningOptions& options);

}  // namespace casnn::trainproto

#endif  // CASNN_TRAINPROTO_MINING_H_
