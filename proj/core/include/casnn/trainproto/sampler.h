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

#ifndef CASNN_TRAINPROTO_SAMPLER_H_
#define CASNN_TRAINPROTO_SAMPLER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "casnn/common/rng.h"
#include "casnn/trainproto/dataset.h"

namespace casnn::trainproto {

// Half-open pixel rectangle on one slide, sampled as benign.
struct Region {
  std::size_t slide = 0;
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t x1 = 0;
  std::size_t y1 = 0;
  std::size_t area() const { return (x1 - x0) * (y1 - y0); }
  bool operator==(const Region&) const = default;
};

struct PatchCenter {
  std::size_t slide = 0;
  long x = 0;
  long y = 0;
  int label = 0;
};

// Class-conditional uniform pixel sampling over a slide set. The benign pool
// is the union (with multiplicity) of benign-annotated pixels and any added
// regions.
class PatchSampler {
 public:
  explicit PatchSampler(std::vector<Slide> slides);

  void add_benign_regions(const std::vector<Region>& regions);
  const std::vector<Region>& benign_regions() const { return regions_; }

  // Size of the sampling pool for a class index.
  std::uint64_t pool_size(int cls) const;

  // Uniform over the class pool; ContractError if the pool is empty.
  PatchCenter draw_center(int cls, Rng& rng) const;
  // Uniform over the three classes.
  int draw_class(Rng& rng) const;

  // size x size crop centred on the pixel, mirrored at the borders.
  Image8 extract(const PatchCenter& center, std::size_t size) const;
  std::pair<Image8, int> sample_patch(int cls, std::size_t size, Rng& rng) const;

  const std::vector<Slide>& slides() const { return slides_; }

 private:
  std::vector<Slide> slides_;
  // cumulative_[slide][cls][row]: class pixels in rows [0, row).
  std::vector<std::array<std::vector<std::uint64_t>, kNumClasses>> cumulative_;
  std::array<std::vector<std::uint64_t>, kNumClasses> slide_prefix_;  // over slides
  std::vector<Region> regions_;
  std::vector<std::uint64_t> region_prefix_;
};

nlohmann::json regions_to_json(const std::vector<Region>& regions,
                               const std::vector<std::string>& slide_ids);
// Resolves slide ids against `slide_ids`, skipping unknown slides.
std::vector<Region> regions_from_json(const nlohmann::json& j,
                                      const std::vector<std::string>& slide_ids);

}  // namespace casnn::trainproto

#endif  // CASNN_TRAINPROTO_SAMPLER_H_
