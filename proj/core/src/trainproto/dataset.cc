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

#include "casnn/trainproto/dataset.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "casnn/common/error.h"

namespace casnn::trainproto {

int class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == name) return static_cast<int>(i);
  }
  throw DataError("unknown class name '" + std::string(name) + "'");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw DataError("unknown split '" + std::string(name) + "'");
}

std::vector<SlideRecord> DatasetIndex::with_split(Split split) const {
  std::vector<SlideRecord> out;
  for (const SlideRecord& s : slides) {
    if (s.split == split) out.push_back(s);
  }
  return out;
}

std::string DatasetIndex::path(const std::string& relative) const {
  return (std::filesystem::path(root) / relative).string();
}

DatasetIndex load_dataset_index(const std::string& dir) {
  const std::filesystem::path file = std::filesystem::path(dir) / kIndexFile;
  std::ifstream in(file);
  if (!in) throw DataError("cannot open dataset index " + file.string());
  DatasetIndex index;
  index.root = dir;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != "casnn-dataset") {
      throw DataError(file.string() + ": unexpected format tag");
    }
    index.pixel_spacing_um = j.at("pixel_spacing_um").get<double>();
    for (const auto& s : j.at("slides")) {
      SlideRecord r;
      r.id = s.at("id").get<std::string>();
      r.image = s.at("image").get<std::string>();
      r.mask = s.at("mask").get<std::string>();
      r.split = split_from_string(s.at("split").get<std::string>());
      r.label = class_from_name(s.at("label").get<std::string>());
      index.slides.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  return index;
}

void save_dataset_index(const std::string& dir, const DatasetIndex& index) {
  nlohmann::json slides = nlohmann::json::array();
  for (const SlideRecord& s : index.slides) {
    slides.push_back({{"id", s.id},
                      {"image", s.image},
                      {"mask", s.mask},
                      {"split", to_string(s.split)},
                      {"label", kClassNames.at(static_cast<std::size_t>(s.label))}});
  }
  const nlohmann::json j = {{"format", "casnn-dataset"},
                            {"version", 1},
                            {"pixel_spacing_um", index.pixel_spacing_um},
                            {"classes", kClassNames},
                            {"slides", slides}};
  const std::filesystem::path file = std::filesystem::path(dir) / kIndexFile;
  std::ofstream out(file);
  if (!out) throw DataError("cannot write dataset index " + file.string());
  out << j.dump(1) << '\n';
}

Slide load_slide(const DatasetIndex& index, const SlideRecord& record) {
  Slide slide;
  slide.record = record;
  slide.image = read_png(index.path(record.image));
  slide.mask = read_png(index.path(record.mask));
  if (slide.image.channels != 3) throw DataError(record.image + ": expected an RGB image");
  if (slide.mask.channels != 1) throw DataError(record.mask + ": expected a gray mask");
  if (slide.image.width != slide.mask.width || slide.image.height != slide.mask.height) {
    throw DataError(record.id + ": image and mask sizes differ");
  }
  for (std::uint8_t v : slide.mask.pixels) {
    if (v > 3) throw DataError(record.mask + ": mask value " + std::to_string(v) + " > 3");
  }
  return slide;
}

}  // namespace casnn::trainproto
