#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "fatigue/io_util.hpp"
#include "fatigue/nn/lstm.hpp"
#include "fatigue/nn/net.hpp"

namespace fatigue::nn {

template <class T>
std::unique_ptr<Layer<T>> layer_from_spec(const nlohmann::json& s) {
  const std::string kind = s.at("kind").get<std::string>();
  if (kind == "conv2d")
    return std::make_unique<Conv2d<T>>(s.at("in_ch").get<int>(), s.at("out_ch").get<int>(),
                                       s.at("kh").get<int>(), s.at("kw").get<int>());
  if (kind == "batchnorm")
    return std::make_unique<BatchNorm2d<T>>(s.at("channels").get<int>(),
                                            s.at("momentum").get<double>(),
                                            s.at("eps").get<double>());
  if (kind == "elu") return std::make_unique<Elu<T>>(s.at("alpha").get<double>());
  if (kind == "maxpool")
    return std::make_unique<MaxPool2d<T>>(s.at("ph").get<int>(), s.at("pw").get<int>());
  if (kind == "avgpool")
    return std::make_unique<AvgPool2d<T>>(s.at("ph").get<int>(), s.at("pw").get<int>());
  if (kind == "linear")
    return std::make_unique<Linear<T>>(s.at("in").get<int>(), s.at("out").get<int>());
  if (kind == "lstm")
    return std::make_unique<Lstm<T>>(s.at("input").get<int>(), s.at("hidden").get<int>());
  if (kind == "conv_to_seq") return std::make_unique<ConvToSeq<T>>();
  if (kind == "take_last") return std::make_unique<TakeLastStep<T>>();
  raise(ErrorCode::format_error, "unknown layer kind in checkpoint: '" + kind + "'");
}

namespace detail {

inline constexpr char kCheckpointMagic[4] = {'F', 'A', 'T', 'N'};
inline constexpr uint32_t kCheckpointVersion = 1;

template <class T>
void write_tensor_f32(std::ostream& os, const Tensor<T>& t) {
  io::write_pod<uint32_t>(os, static_cast<uint32_t>(t.shape.size()));
  for (int d : t.shape) io::write_pod<uint32_t>(os, static_cast<uint32_t>(d));
  for (T v : t.data) io::write_pod<float>(os, static_cast<float>(v));
}

template <class T>
void read_tensor_f32(std::istream& is, Tensor<T>& t) {
  const auto rank = io::read_pod<uint32_t>(is, "tensor rank");
  std::vector<int> shape(rank);
  for (auto& d : shape) d = static_cast<int>(io::read_pod<uint32_t>(is, "tensor dim"));
  if (shape != t.shape)
    raise(ErrorCode::format_error, "checkpoint tensor shape mismatch: expected " +
                                       shape_string(t.shape) + ", got " + shape_string(shape));
  for (auto& v : t.data) v = static_cast<T>(io::read_pod<float>(is, "tensor data"));
}

}  // namespace detail

// Layout: magic "FATN", u32 version, length-prefixed JSON manifest (layer
// specs + caller metadata), then every parameter tensor in declaration order
// followed by every buffer tensor, all f32 little-endian.
template <class T>
void save_network(Network<T>& net, const nlohmann::json& meta, const std::string& path) {
  auto os = io::open_out(path);
  io::write_magic(os, detail::kCheckpointMagic);
  io::write_pod<uint32_t>(os, detail::kCheckpointVersion);
  nlohmann::json manifest;
  manifest["layers"] = nlohmann::json::array();
  for (size_t i = 0; i < net.size(); ++i) manifest["layers"].push_back(net.layer(i).spec());
  manifest["meta"] = meta;
  io::write_string(os, manifest.dump());
  for (size_t i = 0; i < net.size(); ++i) {
    for (auto* p : net.layer(i).params()) detail::write_tensor_f32(os, *p);
    for (auto& [name, buf] : net.layer(i).buffers()) detail::write_tensor_f32(os, *buf);
  }
}

template <class T>
Network<T> load_network(const std::string& path, nlohmann::json* meta_out = nullptr) {
  auto is = io::open_in(path);
  io::expect_magic(is, detail::kCheckpointMagic, path);
  const auto version = io::read_pod<uint32_t>(is, "version");
  if (version != detail::kCheckpointVersion)
    raise(ErrorCode::format_error, path + ": unsupported checkpoint version");
  const auto manifest = nlohmann::json::parse(io::read_string(is, "manifest"));
  Network<T> net;
  for (const auto& spec : manifest.at("layers")) net.add(layer_from_spec<T>(spec));
  for (size_t i = 0; i < net.size(); ++i) {
    for (auto* p : net.layer(i).params()) detail::read_tensor_f32(is, *p);
    for (auto& [name, buf] : net.layer(i).buffers()) detail::read_tensor_f32(is, *buf);
  }
  if (meta_out) *meta_out = manifest.value("meta", nlohmann::json::object());
  return net;
}

}  // namespace fatigue::nn
