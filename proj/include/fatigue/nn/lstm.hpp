#pragma once

#include "fatigue/nn/layers.hpp"

namespace fatigue::nn {

// Standard LSTM over a [T x N x D] sequence, zero initial state, full
// backpropagation through time. Gate rows are packed [i, f, g, o] in the
// 4H-row weight matrices.
template <class T>
class Lstm : public Layer<T> {
 public:
  Lstm(int input_size, int hidden_size)
      : d_(input_size), h_(hidden_size),
        wx_({4 * hidden_size, input_size}), wh_({4 * hidden_size, hidden_size}),
        b_({4 * hidden_size}),
        gwx_({4 * hidden_size, input_size}), gwh_({4 * hidden_size, hidden_size}),
        gb_({4 * hidden_size}) {}

  const char* kind() const override { return "lstm"; }

  void init(Rng& rng) override {
    const double bx = 1.0 / std::sqrt(static_cast<double>(d_));
    for (auto& v : wx_.data) v = static_cast<T>(rng.uniform(-bx, bx));
    const double bh = 1.0 / std::sqrt(static_cast<double>(h_));
    for (auto& v : wh_.data) v = static_cast<T>(rng.uniform(-bh, bh));
    b_.zero();
    // Forget-gate bias starts at 1 so early training does not flush state.
    for (int i = h_; i < 2 * h_; ++i) b_.data[static_cast<size_t>(i)] = T(1);
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 3 || in[2] != d_)
      raise(ErrorCode::shape_error,
            "lstm: expected [T x N x " + std::to_string(d_) + "], got " + shape_string(in));
    return {in[0], in[1], h_};
  }

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    (void)output_shape(x.shape);
    x_ = x;
    const int t_len = x.dim(0), n = x.dim(1);
    const size_t nh = static_cast<size_t>(n) * h_;
    gates_ = Tensor<T>({t_len, n, 4 * h_});
    c_ = Tensor<T>({t_len, n, h_});
    Tensor<T> y({t_len, n, h_});

    std::vector<T> h_prev(nh, T(0)), c_prev(nh, T(0));
    std::vector<T> pre(static_cast<size_t>(n) * 4 * h_);
    for (int t = 0; t < t_len; ++t) {
      const T* xt = x.ptr() + static_cast<size_t>(t) * n * d_;
      // pre = x_t Wx^T + h_prev Wh^T + b
      gemm_nt<T>(xt, wx_.ptr(), pre.data(), n, 4 * h_, d_);
      gemm_nt<T>(h_prev.data(), wh_.ptr(), pre.data(), n, 4 * h_, h_, /*accumulate=*/true);
      T* gt = gates_.ptr() + static_cast<size_t>(t) * n * 4 * h_;
      T* ct = c_.ptr() + static_cast<size_t>(t) * nh;
      T* ht = y.ptr() + static_cast<size_t>(t) * nh;
      for (int s = 0; s < n; ++s) {
        const T* ps = pre.data() + static_cast<size_t>(s) * 4 * h_;
        T* gs = gt + static_cast<size_t>(s) * 4 * h_;
        for (int j = 0; j < h_; ++j) {
          const T ig = sigmoid(ps[j] + b_.data[static_cast<size_t>(j)]);
          const T fg = sigmoid(ps[h_ + j] + b_.data[static_cast<size_t>(h_ + j)]);
          const T gg = std::tanh(ps[2 * h_ + j] + b_.data[static_cast<size_t>(2 * h_ + j)]);
          const T og = sigmoid(ps[3 * h_ + j] + b_.data[static_cast<size_t>(3 * h_ + j)]);
          gs[j] = ig;
          gs[h_ + j] = fg;
          gs[2 * h_ + j] = gg;
          gs[3 * h_ + j] = og;
          const T cv = fg * c_prev[static_cast<size_t>(s) * h_ + j] + ig * gg;
          ct[static_cast<size_t>(s) * h_ + j] = cv;
          ht[static_cast<size_t>(s) * h_ + j] = og * std::tanh(cv);
        }
      }
      std::copy(ht, ht + nh, h_prev.data());
      std::copy(ct, ct + nh, c_prev.data());
    }
    y_ = y;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const int t_len = x_.dim(0), n = x_.dim(1);
    const size_t nh = static_cast<size_t>(n) * h_;
    Tensor<T> gx(x_.shape);
    std::vector<T> dh_next(nh, T(0)), dc_next(nh, T(0));
    std::vector<T> dpre(static_cast<size_t>(n) * 4 * h_);

    for (int t = t_len - 1; t >= 0; --t) {
      const T* gt = gates_.ptr() + static_cast<size_t>(t) * n * 4 * h_;
      const T* ct = c_.ptr() + static_cast<size_t>(t) * nh;
      const T* c_prev = t > 0 ? c_.ptr() + static_cast<size_t>(t - 1) * nh : nullptr;
      const T* gyt = gy.ptr() + static_cast<size_t>(t) * nh;

      for (int s = 0; s < n; ++s) {
        const T* gs = gt + static_cast<size_t>(s) * 4 * h_;
        T* dps = dpre.data() + static_cast<size_t>(s) * 4 * h_;
        for (int j = 0; j < h_; ++j) {
          const size_t sj = static_cast<size_t>(s) * h_ + j;
          const T ig = gs[j], fg = gs[h_ + j], gg = gs[2 * h_ + j], og = gs[3 * h_ + j];
          const T tc = std::tanh(ct[sj]);
          const T dh = gyt[sj] + dh_next[sj];
          const T dog = dh * tc;
          const T dc = dc_next[sj] + dh * og * (T(1) - tc * tc);
          const T dig = dc * gg;
          const T dgg = dc * ig;
          const T cp = c_prev ? c_prev[sj] : T(0);
          const T dfg = dc * cp;
          dc_next[sj] = dc * fg;
          dps[j] = dig * ig * (T(1) - ig);
          dps[h_ + j] = dfg * fg * (T(1) - fg);
          dps[2 * h_ + j] = dgg * (T(1) - gg * gg);
          dps[3 * h_ + j] = dog * og * (T(1) - og);
        }
      }

      const T* xt = x_.ptr() + static_cast<size_t>(t) * n * d_;
      // dWx += dpre^T x_t ; db += column sums of dpre
      gemm_tn<T>(dpre.data(), xt, gwx_.ptr(), 4 * h_, d_, n, /*accumulate=*/true);
      for (int s = 0; s < n; ++s)
        for (int j = 0; j < 4 * h_; ++j)
          gb_.data[static_cast<size_t>(j)] += dpre[static_cast<size_t>(s) * 4 * h_ + j];
      if (t > 0) {
        const T* h_prev = y_.ptr() + static_cast<size_t>(t - 1) * nh;
        gemm_tn<T>(dpre.data(), h_prev, gwh_.ptr(), 4 * h_, h_, n, /*accumulate=*/true);
        gemm_nn<T>(dpre.data(), wh_.ptr(), dh_next.data(), n, h_, 4 * h_);
      }
      // dx_t = dpre Wx
      gemm_nn<T>(dpre.data(), wx_.ptr(), gx.ptr() + static_cast<size_t>(t) * n * d_, n, d_,
                 4 * h_);
    }
    return gx;
  }

  std::vector<Tensor<T>*> params() override { return {&wx_, &wh_, &b_}; }
  std::vector<Tensor<T>*> grads() override { return {&gwx_, &gwh_, &gb_}; }

  nlohmann::json spec() const override {
    return {{"kind", "lstm"}, {"input", d_}, {"hidden", h_}};
  }

 private:
  static T sigmoid(T v) { return T(1) / (T(1) + std::exp(-v)); }

  int d_, h_;
  Tensor<T> wx_, wh_, b_, gwx_, gwh_, gb_;
  Tensor<T> x_, gates_, c_, y_;
};

}  // namespace fatigue::nn
