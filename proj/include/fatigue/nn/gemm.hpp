#pragma once

#include <Eigen/Core>

namespace fatigue::nn {

// All matrix products in the engine funnel through these helpers so the
// backend stays swappable. Row-major views over raw buffers, Eigen kernels.

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapRM = Eigen::Map<RowMat<T>>;
template <class T>
using CMapRM = Eigen::Map<const RowMat<T>>;

// C[M x N] = A[M x K] * B[K x N]        (+ C when accumulate)
template <class T>
void gemm_nn(const T* a, const T* b, T* c, int m, int n, int k, bool accumulate = false) {
  CMapRM<T> am(a, m, k);
  CMapRM<T> bm(b, k, n);
  MapRM<T> cm(c, m, n);
  if (accumulate)
    cm.noalias() += am * bm;
  else
    cm.noalias() = am * bm;
}

// C[M x N] = A[M x K] * B[N x K]^T
template <class T>
void gemm_nt(const T* a, const T* b, T* c, int m, int n, int k, bool accumulate = false) {
  CMapRM<T> am(a, m, k);
  CMapRM<T> bm(b, n, k);
  MapRM<T> cm(c, m, n);
  if (accumulate)
    cm.noalias() += am * bm.transpose();
  else
    cm.noalias() = am * bm.transpose();
}

// C[M x N] = A[K x M]^T * B[K x N]
template <class T>
void gemm_tn(const T* a, const T* b, T* c, int m, int n, int k, bool accumulate = false) {
  CMapRM<T> am(a, k, m);
  CMapRM<T> bm(b, k, n);
  MapRM<T> cm(c, m, n);
  if (accumulate)
    cm.noalias() += am.transpose() * bm;
  else
    cm.noalias() = am.transpose() * bm;
}

}  // namespace fatigue::nn
