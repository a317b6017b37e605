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

#include "casnn/nn/weights_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "casnn/common/error.h"

namespace casnn::nn {
namespace {

constexpr const char* kFormat = "casnn-weights";
constexpr int kVersion = 1;

void append_float_le(std::string& out, float value) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  char buf[4];
  std::memcpy(buf, &bits, 4);
  out.append(buf, 4);
}

float read_float_le(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

nlohmann::json shape_json(const Shape& s) { return nlohmann::json::array({s.n, s.c, s.h, s.w}); }

}  // namespace

nlohmann::json spec_to_json(const LayerSpec& spec) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["trainable"] = spec.trainable;
  switch (spec.kind) {
    case LayerKind::kConv2d:
    case LayerKind::kSoftmaxClassifier:
      j["kernel"] = nlohmann::json::array({spec.out_ch, spec.in_ch, spec.kh, spec.kw});
      j["stride"] = spec.stride;
      j["padding"] = spec.padding;
      j["bias"] = spec.bias;
      break;
    case LayerKind::kBatchNorm:
      j["channels"] = spec.out_ch;
      break;
    case LayerKind::kResidualBlock: {
      nlohmann::json branch = nlohmann::json::array();
      for (const LayerSpec& child : spec.branch) branch.push_back(spec_to_json(child));
      nlohmann::json skip = nlohmann::json::array();
      for (const LayerSpec& child : spec.skip) skip.push_back(spec_to_json(child));
      j["branch"] = std::move(branch);
      j["skip"] = std::move(skip);
      j["merge"] = std::string(to_string(LayerKind::kElementwiseSum));
      break;
    }
    default:
      break;
  }
  return j;
}

LayerSpec spec_from_json(const nlohmann::json& j) {
  try {
    LayerSpec spec;
    spec.kind = layer_kind_from_string(j.at("kind").get<std::string>());
    spec.trainable = j.at("trainable").get<bool>();
    switch (spec.kind) {
      case LayerKind::kConv2d:
      case LayerKind::kSoftmaxClassifier: {
        const auto& k = j.at("kernel");
        spec.out_ch = k.at(0).get<std::size_t>();
        spec.in_ch = k.at(1).get<std::size_t>();
        spec.kh = k.at(2).get<std::size_t>();
        spec.kw = k.at(3).get<std::size_t>();
        spec.stride = j.at("stride").get<std::size_t>();
        spec.padding = j.at("padding").get<std::size_t>();
        spec.bias = j.at("bias").get<bool>();
        break;
      }
      case LayerKind::kBatchNorm:
        spec.out_ch = spec.in_ch = j.at("channels").get<std::size_t>();
        break;
      case LayerKind::kResidualBlock:
        for (const auto& child : j.at("branch")) spec.branch.push_back(spec_from_json(child));
        for (const auto& child : j.at("skip")) spec.skip.push_back(spec_from_json(child));
        break;
      default:
        break;
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed layer spec: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("malformed layer spec: ") + e.what());
  }
}

template <typename T>
Network<T>& WeightBundle<T>::get(const std::string& name) {
  for (auto& entry : networks) {
    if (entry.name == name) return entry.network;
  }
  throw DataError("weight file has no network named '" + name + "'");
}

template <typename T>
std::string encode_weights(const std::vector<NamedNetwork<T>>& networks,
                           const nlohmann::json& meta) {
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["meta"] = meta.is_null() ? nlohmann::json::object() : meta;
  nlohmann::json nets = nlohmann::json::array();
  std::string payload;
  for (const NamedNetwork<T>& entry : networks) {
    auto& net = const_cast<Network<T>&>(*entry.network);
    nlohmann::json n;
    n["name"] = entry.name;
    const Shape in = net.reference_input();
    n["input"] = nlohmann::json::array({in.c, in.h, in.w});
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerSpec& spec : net.specs()) layers.push_back(spec_to_json(spec));
    n["layers"] = std::move(layers);
    nlohmann::json tensors = nlohmann::json::array();
    for (const StateTensor<T>& st : net.state()) {
      tensors.push_back({{"name", st.name}, {"shape", shape_json(st.tensor->shape())}});
      for (T v : st.tensor->values()) append_float_le(payload, static_cast<float>(v));
    }
    n["tensors"] = std::move(tensors);
    nets.push_back(std::move(n));
  }
  header["networks"] = std::move(nets);
  std::string out = header.dump();
  out.push_back('\n');
  out += payload;
  return out;
}

template <typename T>
WeightBundle<T> decode_weights(const std::string& bytes) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string::npos) throw DataError("weight file: missing header terminator");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("weight file: header is not valid JSON: ") + e.what());
  }
  if (header.value("format", "") != kFormat || header.value("version", 0) != kVersion) {
    throw DataError("weight file: unsupported format or version");
  }
  WeightBundle<T> bundle;
  bundle.meta = header.at("meta");
  std::size_t offset = newline + 1;
  for (const auto& n : header.at("networks")) {
    const auto& in = n.at("input");
    const Shape reference{1, in.at(0).get<std::size_t>(), in.at(1).get<std::size_t>(),
                          in.at(2).get<std::size_t>()};
    std::vector<LayerSpec> specs;
    for (const auto& l : n.at("layers")) specs.push_back(spec_from_json(l));
    Network<T> net;
    try {
      net = network_from_specs<T>(reference, specs);
    } catch (const ContractError& e) {
      throw DataError(std::string("weight file: inconsistent layer list: ") + e.what());
    }
    std::vector<StateTensor<T>> state = net.state();
    const auto& tensors = n.at("tensors");
    if (tensors.size() != state.size()) {
      throw DataError("weight file: network '" + n.at("name").get<std::string>() + "' lists " +
                      std::to_string(tensors.size()) + " tensors, graph has " +
                      std::to_string(state.size()));
    }
    for (std::size_t i = 0; i < state.size(); ++i) {
      const auto& t = tensors[i];
      const auto& sh = t.at("shape");
      const Shape shape{sh.at(0).get<std::size_t>(), sh.at(1).get<std::size_t>(),
                        sh.at(2).get<std::size_t>(), sh.at(3).get<std::size_t>()};
      if (t.at("name").get<std::string>() != state[i].name ||
          !(shape == state[i].tensor->shape())) {
        throw DataError("weight file: tensor " + std::to_string(i) + " (" +
                        t.at("name").get<std::string>() + ") does not match graph tensor " +
                        state[i].name + " " + state[i].tensor->shape().to_string());
      }
      const std::size_t count = shape.size();
      if (offset + 4 * count > bytes.size()) throw DataError("weight file: truncated payload");
      Tensor<T>& dst = *state[i].tensor;
      for (std::size_t k = 0; k < count; ++k) {
        dst[k] = static_cast<T>(read_float_le(bytes.data() + offset + 4 * k));
      }
      offset += 4 * count;
    }
    bundle.networks.push_back({n.at("name").get<std::string>(), std::move(net)});
  }
  if (offset != bytes.size()) throw DataError("weight file: trailing bytes after payload");
  return bundle;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path);
}

template <typename T>
void save_weights(const std::string& path, const std::vector<NamedNetwork<T>>& networks,
                  const nlohmann::json& meta) {
  write_file_bytes(path, encode_weights(networks, meta));
}

template <typename T>
WeightBundle<T> load_weights(const std::string& path) {
  return decode_weights<T>(read_file_bytes(path));
}

#define CASNN_INSTANTIATE_IO(T)                                                             \
  template struct WeightBundle<T>;                                                          \
  template std::string encode_weights<T>(const std::vector<NamedNetwork<T>>&,               \
                                         const nlohmann::json&);                            \
  template WeightBundle<T> decode_weights<T>(const std::string&);                           \
  template void save_weights<T>(const std::string&, const std::vector<NamedNetwork<T>>&,    \
                                const nlohmann::json&);                                     \
  template WeightBundle<T> load_weights<T>(const std::string&);

CASNN_INSTANTIATE_IO(float)
CASNN_INSTANTIATE_IO(double)

#undef CASNN_INSTANTIATE_IO

}  // namespace casnn::nn
