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

#ifndef CASNN_NN_WEIGHTS_IO_H_
#define CASNN_NN_WEIGHTS_IO_H_

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "casnn/nn/network.h"

namespace casnn::nn {

// Weight file layout: one line of JSON (UTF-8, terminated by '\n') describing
// every network's layer specs and tensor shapes in graph order, followed by
// the tensor values as raw little-endian float32, concatenated in header
// order. Loading and re-saving a file reproduces it byte for byte.
//
//   {"format":"casnn-weights","version":1,"meta":{...},
//    "networks":[{"name":"wrn","input":[3,224,224],"layers":[...],
//                 "tensors":[{"name":"layers.0.weight","shape":[32,3,3,3]},...]}]}

template <typename T>
struct NamedNetwork {
  std::string name;
  const Network<T>* network = nullptr;
};

template <typename T>
struct LoadedNetwork {
  std::string name;
  Network<T> network;
};

template <typename T>
struct WeightBundle {
  nlohmann::json meta;
  std::vector<LoadedNetwork<T>> networks;

  Network<T>& get(const std::string& name);
};

nlohmann::json spec_to_json(const LayerSpec& spec);
LayerSpec spec_from_json(const nlohmann::json& j);

template <typename T>
std::string encode_weights(const std::vector<NamedNetwork<T>>& networks,
                           const nlohmann::json& meta);
template <typename T>
WeightBundle<T> decode_weights(const std::string& bytes);

template <typename T>
void save_weights(const std::string& path, const std::vector<NamedNetwork<T>>& networks,
                  const nlohmann::json& meta);
template <typename T>
WeightBundle<T> load_weights(const std::string& path);

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace casnn::nn

#endif  // CASNN_NN_WEIGHTS_IO_H_
