#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fatigue/nn/tensor.hpp"

namespace fatigue::nn {

template <class T>
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(std::span<Tensor<T>* const> params, std::span<Tensor<T>* const> grads) = 0;
};

template <class T>
class SgdMomentum : public Optimizer<T> {
 public:
  explicit SgdMomentum(double lr, double momentum = 0.9) : lr_(lr), mu_(momentum) {}

  void step(std::span<Tensor<T>* const> params, std::span<Tensor<T>* const> grads) override {
    ensure_state(params);
    for (size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i]->data;
      const auto& g = grads[i]->data;
      auto& v = velocity_[i];
      for (size_t j = 0; j < p.size(); ++j) {
        v[j] = static_cast<T>(mu_ * v[j] + g[j]);
        p[j] -= static_cast<T>(lr_) * v[j];
      }
    }
  }

 private:
  void ensure_state(std::span<Tensor<T>* const> params) {
    if (!velocity_.empty()) return;
    for (auto* p : params) velocity_.emplace_back(p->data.size(), T(0));
  }

  double lr_, mu_;
  std::vector<std::vector<T>> velocity_;
};

template <class T>
class Adam : public Optimizer<T> {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(std::span<Tensor<T>* const> params, std::span<Tensor<T>* const> grads) override {
    ensure_state(params);
    ++t_;
    const double bc1 = 1.0 - std::pow(b1_, t_);
    const double bc2 = 1.0 - std::pow(b2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i]->data;
      const auto& g = grads[i]->data;
      auto& m = m_[i];
      auto& v = v_[i];
      for (size_t j = 0; j < p.size(); ++j) {
        m[j] = static_cast<T>(b1_ * m[j] + (1.0 - b1_) * g[j]);
        v[j] = static_cast<T>(b2_ * v[j] + (1.0 - b2_) * static_cast<double>(g[j]) * g[j]);
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        p[j] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

 private:
  void ensure_state(std::span<Tensor<T>* const> params) {
    if (!m_.empty()) return;
    for (auto* p : params) {
      m_.emplace_back(p->data.size(), T(0));
      v_.emplace_back(p->data.size(), T(0));
    }
  }

  double lr_, b1_, b2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace fatigue::nn
