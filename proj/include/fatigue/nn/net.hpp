#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fatigue/nn/layers.hpp"

namespace fatigue::nn {

template <class T>
class Network {
 public:
  Network() = default;
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }
  size_t size() const { return layers_.size(); }
  Layer<T>& layer(size_t i) { return *layers_.at(i); }
  const Layer<T>& layer(size_t i) const { return *layers_.at(i); }

  void init(uint64_t seed) {
    Rng rng(seed);
    for (auto& l : layers_) l->init(rng);
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    Tensor<T> cur = x;
    for (size_t i = 0; i < layers_.size(); ++i) {
      cur = layers_[i]->forward(cur, training);
      if (!cur.all_finite())
        raise(ErrorCode::numeric_error,
              "non-finite activation after layer " + std::to_string(i) + " (" +
                  layers_[i]->kind() + ")");
    }
    return cur;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    Tensor<T> cur = grad_out;
    for (size_t i = layers_.size(); i-- > 0;) {
      cur = layers_[i]->backward(cur);
      if (!cur.all_finite())
        raise(ErrorCode::numeric_error,
              "non-finite gradient after layer " + std::to_string(i) + " (" +
                  layers_[i]->kind() + ")");
    }
    return cur;
  }

  std::vector<Tensor<T>*> params() {
    std::vector<Tensor<T>*> all;
    for (auto& l : layers_)
      for (auto* p : l->params()) all.push_back(p);
    return all;
  }

  std::vector<Tensor<T>*> grads() {
    std::vector<Tensor<T>*> all;
    for (auto& l : layers_)
      for (auto* g : l->grads()) all.push_back(g);
    return all;
  }

  void zero_grads() {
    for (auto* g : grads()) g->zero();
  }

  int64_t param_count() {
    int64_t n = 0;
    for (auto* p : params()) n += p->numel();
    return n;
  }

  // One line per layer: kind, hyperparameters, output shape. Pinned by a
  // golden-file test, so the format is part of the contract.
  std::vector<std::string> shape_trace(const std::vector<int>& input_shape) {
    std::vector<std::string> lines;
    lines.push_back("input " + shape_string(input_shape));
    std::vector<int> cur = input_shape;
    for (auto& l : layers_) {
      cur = l->output_shape(cur);
      std::ostringstream os;
      os << l->kind();
      const auto spec = l->spec();
      for (auto it = spec.begin(); it != spec.end(); ++it) {
        if (it.key() == "kind") continue;
        os << ' ' << it.key() << '=' << it.value().dump();
      }
      os << " -> " << shape_string(cur);
      lines.push_back(os.str());
    }
    return lines;
  }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace fatigue::nn
