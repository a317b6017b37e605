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

#ifndef CASNN_TRAINPROTO_DATASET_H_
#define CASNN_TRAINPROTO_DATASET_H_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "casnn/common/image.h"

namespace casnn::trainproto {

// Mask values: 0 background, 1 benign, 2 DCIS, 3 IDC. Class indices used by
// the networks are mask value - 1.
inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {"benign", "dcis",
                                                                          "idc"};
int class_from_name(std::string_view name);

enum class Split { kTrain, kVal, kTest };
std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

struct SlideRecord {
  std::string id;
  std::string image;  // relative to the dataset directory
  std::string mask;
  Split split = Split::kTrain;
  int label = 0;  // class index of the worst abnormality present
  bool operator==(const SlideRecord&) const = default;
};

// Directory of image_XXXX.png / mask_XXXX.png pairs plus index.json.
struct DatasetIndex {
  std::string root;
  double pixel_spacing_um = 1.0;
  std::vector<SlideRecord> slides;

  std::vector<SlideRecord> with_split(Split split) const;
  std::string path(const std::string& relative) const;
};

inline constexpr const char* kIndexFile = "index.json";

DatasetIndex load_dataset_index(const std::string& dir);
void save_dataset_index(const std::string& dir, const DatasetIndex& index);

struct Slide {
  SlideRecord record;
  Image8 image;  // RGB
  Image8 mask;   // gray, values 0..3
};

// Validates shape agreement and mask values.
Slide load_slide(const DatasetIndex& index, const SlideRecord& record);

}  // namespace casnn::trainproto

#endif  // CASNN_TRAINPROTO_DATASET_H_
