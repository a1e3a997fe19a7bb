#pragma once

#include <cmath>
#include <vector>

#include "fatigue/nn/tensor.hpp"

namespace fatigue::nn {

template <class T>
struct SoftmaxXent {
  double loss = 0.0;
  Tensor<T> probs;    // [N x K], rows sum to 1
  Tensor<T> dlogits;  // (probs - onehot) / N
};

// Mean negative log-likelihood of a 3-way (or K-way) softmax.
template <class T>
SoftmaxXent<T> softmax_xent(const Tensor<T>& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2) raise(ErrorCode::shape_error, "softmax_xent: expected [N x K] logits");
  const int n = logits.dim(0), k = logits.dim(1);
  if (static_cast<int>(labels.size()) != n)
    raise(ErrorCode::shape_error, "softmax_xent: labels/logits size mismatch");

  SoftmaxXent<T> out;
  out.probs = Tensor<T>({n, k});
  out.dlogits = Tensor<T>({n, k});
  double total = 0.0;
  for (int s = 0; s < n; ++s) {
    const int y = labels[static_cast<size_t>(s)];
    if (y < 0 || y >= k)
      raise(ErrorCode::domain_error, "softmax_xent: label index out of range");
    const T* row = logits.ptr() + static_cast<size_t>(s) * k;
    T mx = row[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (int j = 0; j < k; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
    T* p = out.probs.ptr() + static_cast<size_t>(s) * k;
    for (int j = 0; j < k; ++j)
      p[j] = static_cast<T>(std::exp(static_cast<double>(row[j] - mx)) / denom);
    total -= std::log(std::max(static_cast<double>(p[y]), 1e-300));
    T* d = out.dlogits.ptr() + static_cast<size_t>(s) * k;
    for (int j = 0; j < k; ++j)
      d[j] = (p[j] - (j == y ? T(1) : T(0))) / static_cast<T>(n);
  }
  out.loss = total / n;
  return out;
}

}  // namespace fatigue::nn
