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

#include "casnn/trainproto/sampler.h"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "casnn/common/error.h"

namespace casnn::trainproto {
namespace {

// Index of the bucket holding the k-th item of a cumulative count vector
// (prefix[0] = 0, prefix.back() = total).
std::size_t bucket_of(const std::vector<std::uint64_t>& prefix, std::uint64_t k) {
  const auto it = std::upper_bound(prefix.begin(), prefix.end(), k);
  return static_cast<std::size_t>(it - prefix.begin()) - 1;
}

}  // namespace

PatchSampler::PatchSampler(std::vector<Slide> slides) : slides_(std::move(slides)) {
  cumulative_.resize(slides_.size());
  for (auto& prefix : slide_prefix_) prefix.assign(1, 0);
  for (std::size_t s = 0; s < slides_.size(); ++s) {
    const Image8& mask = slides_[s].mask;
    for (auto& rows : cumulative_[s]) rows.assign(mask.height + 1, 0);
    std::array<std::uint64_t, kNumClasses> running{};
    for (std::size_t y = 0; y < mask.height; ++y) {
      for (std::size_t x = 0; x < mask.width; ++x) {
        const std::uint8_t v = mask.at(x, y);
        if (v >= 1) ++running[v - 1];
      }
      for (std::size_t c = 0; c < kNumClasses; ++c) cumulative_[s][c][y + 1] = running[c];
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      slide_prefix_[c].push_back(slide_prefix_[c].back() + running[c]);
    }
  }
  region_prefix_.assign(1, 0);
}

void PatchSampler::add_benign_regions(const std::vector<Region>& regions) {
  for (const Region& r : regions) {
    if (r.slide >= slides_.size()) throw ContractError("region refers to an unknown slide");
    const Image8& img = slides_[r.slide].image;
    if (r.x0 >= r.x1 || r.y0 >= r.y1 || r.x1 > img.width || r.y1 > img.height) {
      throw ContractError("region rectangle is empty or outside its slide");
    }
    regions_.push_back(r);
    region_prefix_.push_back(region_prefix_.back() + r.area());
  }
}

std::uint64_t PatchSampler::pool_size(int cls) const {
  if (cls < 0 || cls >= static_cast<int>(kNumClasses)) throw ContractError("class out of range");
  const std::uint64_t annotated = slide_prefix_[static_cast<std::size_t>(cls)].back();
  return cls == 0 ? annotated + region_prefix_.back() : annotated;
}

PatchCenter PatchSampler::draw_center(int cls, Rng& rng) const {
  const std::uint64_t pool = pool_size(cls);
  if (pool == 0) {
    throw ContractError("no training pixels for class '" +
                        std::string(kClassNames[static_cast<std::size_t>(cls)]) + "'");
  }
  std::uint64_t k = uniform_index(rng, pool);
  const auto& prefix = slide_prefix_[static_cast<std::size_t>(cls)];
  PatchCenter center;
  center.label = cls;
  if (k >= prefix.back()) {
    k -= prefix.back();
    const std::size_t r = bucket_of(region_prefix_, k);
    const Region& reg = regions_[r];
    const std::uint64_t offset = k - region_prefix_[r];
    const std::size_t w = reg.x1 - reg.x0;
    center.slide = reg.slide;
    center.x = static_cast<long>(reg.x0 + offset % w);
    center.y = static_cast<long>(reg.y0 + offset / w);
    return center;
  }
  const std::size_t s = bucket_of(prefix, k);
  k -= prefix[s];
  const auto& rows = cumulative_[s][static_cast<std::size_t>(cls)];
  const std::size_t y = bucket_of(rows, k);
  k -= rows[y];
  const Image8& mask = slides_[s].mask;
  const std::uint8_t value = static_cast<std::uint8_t>(cls + 1);
  for (std::size_t x = 0; x < mask.width; ++x) {
    if (mask.at(x, y) != value) continue;
    if (k == 0) {
      center.slide = s;
      center.x = static_cast<long>(x);
      center.y = static_cast<long>(y);
      return center;
    }
    --k;
  }
  throw ContractError("sampler index out of sync with the mask");
}

int PatchSampler::draw_class(Rng& rng) const {
  return static_cast<int>(uniform_index(rng, kNumClasses));
}

Image8 PatchSampler::extract(const PatchCenter& center, std::size_t size) const {
  return crop_mirrored(slides_.at(center.slide).image, center.x, center.y, size);
}

std::pair<Image8, int> PatchSampler::sample_patch(int cls, std::size_t size, Rng& rng) const {
  const PatchCenter c = draw_center(cls, rng);
  return {extract(c, size), c.label};
}

nlohmann::json regions_to_json(const std::vector<Region>& regions,
                               const std::vector<std::string>& slide_ids) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Region& r : regions) {
    arr.push_back({{"slide", slide_ids.at(r.slide)}, {"rect", {r.x0, r.y0, r.x1, r.y1}}});
  }
  return {{"format", "casnn-regions"}, {"version", 1}, {"regions", arr}};
}

std::vector<Region> regions_from_json(const nlohmann::json& j,
                                      const std::vector<std::string>& slide_ids) {
  std::unordered_map<std::string, std::size_t> lookup;
  for (std::size_t i = 0; i < slide_ids.size(); ++i) lookup[slide_ids[i]] = i;
  std::vector<Region> out;
  try {
    for (const auto& item : j.at("regions")) {
      const auto it = lookup.find(item.at("slide").get<std::string>());
      if (it == lookup.end()) continue;
      const auto& rect = item.at("rect");
      out.push_back({it->second, rect.at(0).get<std::size_t>(), rect.at(1).get<std::size_t>(),
                     rect.at(2).get<std::size_t>(), rect.at(3).get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed region list: ") + e.what());
  }
  return out;
}

}  // namespace casnn::trainproto
