#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fatigue/nn/gemm.hpp"
#include "fatigue/nn/tensor.hpp"
#include "fatigue/rng.hpp"

namespace fatigue::nn {

template <class T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual const char* kind() const = 0;
  virtual void init(Rng&) {}
  virtual Tensor<T> forward(const Tensor<T>& x, bool training) = 0;
  virtual Tensor<T> backward(const Tensor<T>& gy) = 0;
  virtual std::vector<Tensor<T>*> params() { return {}; }
  virtual std::vector<Tensor<T>*> grads() { return {}; }
  // Non-trainable state that still belongs in a checkpoint (BN statistics).
  virtual std::vector<std::pair<std::string, Tensor<T>*>> buffers() { return {}; }
  virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
  virtual nlohmann::json spec() const = 0;

  int64_t param_count() {
    int64_t n = 0;
    for (auto* p : params()) n += p->numel();
    return n;
  }
};

// ---------------------------------------------------------------------------
// Conv2d: valid convolution, stride 1x1, via im2col + GEMM.
template <class T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(int in_ch, int out_ch, int kh, int kw)
      : in_ch_(in_ch), out_ch_(out_ch), kh_(kh), kw_(kw),
        w_({out_ch, in_ch, kh, kw}), b_({out_ch}),
        gw_({out_ch, in_ch, kh, kw}), gb_({out_ch}) {
    if (in_ch <= 0 || out_ch <= 0 || kh <= 0 || kw <= 0)
      raise(ErrorCode::shape_error, "conv2d: non-positive hyperparameter");
  }

  const char* kind() const override { return "conv2d"; }

  void init(Rng& rng) override {
    // Kaiming-uniform with fan_in = C*kh*kw.
    const double fan_in = static_cast<double>(in_ch_) * kh_ * kw_;
    const double bound = std::sqrt(6.0 / fan_in);
    for (auto& v : w_.data) v = static_cast<T>(rng.uniform(-bound, bound));
    const double bb = 1.0 / std::sqrt(fan_in);
    for (auto& v : b_.data) v = static_cast<T>(rng.uniform(-bb, bb));
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 4) raise(ErrorCode::shape_error, "conv2d: expected NCHW input");
    if (in[1] != in_ch_)
      raise(ErrorCode::shape_error, "conv2d: input has " + std::to_string(in[1]) +
                                        " channels, layer expects " + std::to_string(in_ch_));
    if (in[2] < kh_ || in[3] < kw_)
      raise(ErrorCode::shape_error, "conv2d: kernel " + std::to_string(kh_) + "x" +
                                        std::to_string(kw_) + " larger than input " +
                                        std::to_string(in[2]) + "x" + std::to_string(in[3]));
    return {in[0], out_ch_, in[2] - kh_ + 1, in[3] - kw_ + 1};
  }

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    const auto oshape = output_shape(x.shape);
    x_ = x;
    Tensor<T> y(oshape);
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int oh = oshape[2], ow = oshape[3];
    const int ckk = in_ch_ * kh_ * kw_;
    const int opix = oh * ow;
    col_.resize(static_cast<size_t>(ckk) * opix);
    const size_t in_stride = static_cast<size_t>(in_ch_) * h * w;
    const size_t out_stride = static_cast<size_t>(out_ch_) * opix;
    for (int s = 0; s < n; ++s) {
      im2col(x.ptr() + s * in_stride, h, w, oh, ow);
      T* yp = y.ptr() + s * out_stride;
      gemm_nn<T>(w_.ptr(), col_.data(), yp, out_ch_, opix, ckk);
      for (int f = 0; f < out_ch_; ++f) {
        const T bv = b_.data[static_cast<size_t>(f)];
        T* row = yp + static_cast<size_t>(f) * opix;
        for (int i = 0; i < opix; ++i) row[i] += bv;
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const int n = x_.dim(0), h = x_.dim(2), w = x_.dim(3);
    const int oh = gy.dim(2), ow = gy.dim(3);
    const int ckk = in_ch_ * kh_ * kw_;
    const int opix = oh * ow;
    Tensor<T> gx(x_.shape);
    dcol_.resize(static_cast<size_t>(ckk) * opix);
    const size_t in_stride = static_cast<size_t>(in_ch_) * h * w;
    const size_t out_stride = static_cast<size_t>(out_ch_) * opix;
    for (int s = 0; s < n; ++s) {
      const T* gyp = gy.ptr() + s * out_stride;
      // dW += gy_s * col_s^T
      im2col(x_.ptr() + s * in_stride, h, w, oh, ow);
      gemm_nt<T>(gyp, col_.data(), gw_.ptr(), out_ch_, ckk, opix, /*accumulate=*/true);
      // db += row sums of gy_s
      for (int f = 0; f < out_ch_; ++f) {
        T acc = T(0);
        const T* row = gyp + static_cast<size_t>(f) * opix;
        for (int i = 0; i < opix; ++i) acc += row[i];
        gb_.data[static_cast<size_t>(f)] += acc;
      }
      // dcol = W^T * gy_s ; then scatter back
      gemm_tn<T>(w_.ptr(), gyp, dcol_.data(), ckk, opix, out_ch_);
      col2im(gx.ptr() + s * in_stride, h, w, oh, ow);
    }
    return gx;
  }

  std::vector<Tensor<T>*> params() override { return {&w_, &b_}; }
  std::vector<Tensor<T>*> grads() override { return {&gw_, &gb_}; }

  nlohmann::json spec() const override {
    return {{"kind", "conv2d"}, {"in_ch", in_ch_}, {"out_ch", out_ch_}, {"kh", kh_}, {"kw", kw_}};
  }

 private:
  void im2col(const T* x, int h, int w, int oh, int ow) {
    const int opix = oh * ow;
    T* col = col_.data();
    for (int c = 0; c < in_ch_; ++c) {
      const T* chan = x + static_cast<size_t>(c) * h * w;
      for (int ki = 0; ki < kh_; ++ki) {
        for (int kj = 0; kj < kw_; ++kj) {
          T* dst = col + static_cast<size_t>((c * kh_ + ki) * kw_ + kj) * opix;
          for (int i = 0; i < oh; ++i) {
            const T* src = chan + static_cast<size_t>(i + ki) * w + kj;
            for (int j = 0; j < ow; ++j) dst[j] = src[j];
            dst += ow;
          }
        }
      }
    }
  }

  void col2im(T* gx, int h, int w, int oh, int ow) {
    const int opix = oh * ow;
    const T* col = dcol_.data();
    for (int c = 0; c < in_ch_; ++c) {
      T* chan = gx + static_cast<size_t>(c) * h * w;
      for (int ki = 0; ki < kh_; ++ki) {
        for (int kj = 0; kj < kw_; ++kj) {
          const T* src = col + static_cast<size_t>((c * kh_ + ki) * kw_ + kj) * opix;
          for (int i = 0; i < oh; ++i) {
            T* dst = chan + static_cast<size_t>(i + ki) * w + kj;
            for (int j = 0; j < ow; ++j) dst[j] += src[j];
            src += ow;
          }
        }
      }
    }
  }

  int in_ch_, out_ch_, kh_, kw_;
  Tensor<T> w_, b_, gw_, gb_;
  Tensor<T> x_;
  std::vector<T> col_, dcol_;
};

// ---------------------------------------------------------------------------
// BatchNorm2d: per-channel statistics over (N, H, W).
template <class T>
class BatchNorm2d : public Layer<T> {
 public:
  explicit BatchNorm2d(int channels, double momentum = 0.1, double eps = 1e-5)
      : c_(channels), momentum_(momentum), eps_(eps),
        gamma_({channels}), beta_({channels}), ggamma_({channels}), gbeta_({channels}),
        run_mean_({channels}), run_var_({channels}) {
    gamma_.fill(T(1));
    run_var_.fill(T(1));
  }

  const char* kind() const override { return "batchnorm"; }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 4 || in[1] != c_)
      raise(ErrorCode::shape_error, "batchnorm: expected NCHW with C=" + std::to_string(c_));
    return in;
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) override {
    (void)output_shape(x.shape);
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int64_t m = static_cast<int64_t>(n) * h * w;
    Tensor<T> y(x.shape);
    if (training) {
      if (n < 2) raise(ErrorCode::domain_error, "batchnorm: training requires batch >= 2");
      xhat_ = Tensor<T>(x.shape);
      invstd_.assign(static_cast<size_t>(c_), T(0));
      for (int c = 0; c < c_; ++c) {
        double mean = 0.0, var = 0.0;
        for (int s = 0; s < n; ++s) {
          const T* p = plane(x, s, c, h, w);
          for (int64_t i = 0; i < static_cast<int64_t>(h) * w; ++i) mean += p[i];
        }
        mean /= static_cast<double>(m);
        for (int s = 0; s < n; ++s) {
          const T* p = plane(x, s, c, h, w);
          for (int64_t i = 0; i < static_cast<int64_t>(h) * w; ++i) {
            const double d = p[i] - mean;
            var += d * d;
          }
        }
        var /= static_cast<double>(m);  // biased, as normalization uses it
        const double istd = 1.0 / std::sqrt(var + eps_);
        invstd_[static_cast<size_t>(c)] = static_cast<T>(istd);
        const T g = gamma_.data[static_cast<size_t>(c)];
        const T bt = beta_.data[static_cast<size_t>(c)];
        for (int s = 0; s < n; ++s) {
          const T* p = plane(x, s, c, h, w);
          T* xh = plane(xhat_, s, c, h, w);
          T* yp = plane(y, s, c, h, w);
          for (int64_t i = 0; i < static_cast<int64_t>(h) * w; ++i) {
            xh[i] = static_cast<T>((p[i] - mean) * istd);
            yp[i] = g * xh[i] + bt;
          }
        }
        // Running stats use the unbiased variance.
        const double unbiased = m > 1 ? var * static_cast<double>(m) / (m - 1) : var;
        run_mean_.data[static_cast<size_t>(c)] =
            static_cast<T>((1.0 - momentum_) * run_mean_.data[static_cast<size_t>(c)] +
                           momentum_ * mean);
        run_var_.data[static_cast<size_t>(c)] =
            static_cast<T>((1.0 - momentum_) * run_var_.data[static_cast<size_t>(c)] +
                           momentum_ * unbiased);
      }
    } else {
      for (int c = 0; c < c_; ++c) {
        const double istd = 1.0 / std::sqrt(static_cast<double>(run_var_.data[c]) + eps_);
        const double mean = run_mean_.data[c];
        const T g = gamma_.data[static_cast<size_t>(c)];
        const T bt = beta_.data[static_cast<size_t>(c)];
        for (int s = 0; s < n; ++s) {
          const T* p = plane(x, s, c, h, w);
          T* yp = plane(y, s, c, h, w);
          for (int64_t i = 0; i < static_cast<int64_t>(h) * w; ++i)
            yp[i] = static_cast<T>(g * (p[i] - mean) * istd + bt);
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const int n = gy.dim(0), h = gy.dim(2), w = gy.dim(3);
    const double m = static_cast<double>(n) * h * w;
    Tensor<T> gx(gy.shape);
    for (int c = 0; c < c_; ++c) {
      double sum_gy = 0.0, sum_gy_xhat = 0.0;
      for (int s = 0; s < n; ++s) {
        const T* gp = plane(gy, s, c, h, w);
        const T* xh = plane(xhat_, s, c, h, w);
        for (int64_t i = 0; i < static_cast<int64_t>(h) * w; ++i) {
          sum_gy += gp[i];
          sum_gy_xhat += gp[i] * xh[i];
        }
      }
      ggamma_.data[static_cast<size_t>(c)] += static_cast<T>(sum_gy_xhat);
      gbeta_.data[static_cast<size_t>(c)] += static_cast<T>(sum_gy);
      const double g_istd_m = gamma_.data[static_cast<size_t>(c)] *
                              static_cast<double>(invstd_[static_cast<size_t>(c)]) / m;
      for (int s = 0; s < n; ++s) {
        const T* gp = plane(gy, s, c, h, w);
        const T* xh = plane(xhat_, s, c, h, w);
        T* gxp = plane(gx, s, c, h, w);
        for (int64_t i = 0; i < static_cast<int64_t>(h) * w; ++i)
          gxp[i] = static_cast<T>(g_istd_m * (m * gp[i] - sum_gy - xh[i] * sum_gy_xhat));
      }
    }
    return gx;
  }

  std::vector<Tensor<T>*> params() override { return {&gamma_, &beta_}; }
  std::vector<Tensor<T>*> grads() override { return {&ggamma_, &gbeta_}; }
  std::vector<std::pair<std::string, Tensor<T>*>> buffers() override {
    return {{"running_mean", &run_mean_}, {"running_var", &run_var_}};
  }

  nlohmann::json spec() const override {
    return {{"kind", "batchnorm"}, {"channels", c_}, {"momentum", momentum_}, {"eps", eps_}};
  }

 private:
  static const T* plane(const Tensor<T>& t, int s, int c, int h, int w) {
    return t.ptr() + (static_cast<size_t>(s) * t.dim(1) + c) * h * w;
  }
  static T* plane(Tensor<T>& t, int s, int c, int h, int w) {
    return t.ptr() + (static_cast<size_t>(s) * t.dim(1) + c) * h * w;
  }

  int c_;
  double momentum_, eps_;
  Tensor<T> gamma_, beta_, ggamma_, gbeta_;
  Tensor<T> run_mean_, run_var_;
  Tensor<T> xhat_;
  std::vector<T> invstd_;
};

// ---------------------------------------------------------------------------
template <class T>
class Elu : public Layer<T> {
 public:
  explicit Elu(double alpha = 1.0) : alpha_(alpha) {}
  const char* kind() const override { return "elu"; }

  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    y_ = Tensor<T>(x.shape);
    const T a = static_cast<T>(alpha_);
    for (size_t i = 0; i < x.data.size(); ++i) {
      const T v = x.data[i];
      y_.data[i] = v > T(0) ? v : a * (std::exp(v) - T(1));
    }
    return y_;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(gy.shape);
    const T a = static_cast<T>(alpha_);
    for (size_t i = 0; i < gy.data.size(); ++i) {
      const T y = y_.data[i];
      gx.data[i] = gy.data[i] * (y > T(0) ? T(1) : y + a);
    }
    return gx;
  }

  nlohmann::json spec() const override { return {{"kind", "elu"}, {"alpha", alpha_}}; }

 private:
  double alpha_;
  Tensor<T> y_;
};

// ---------------------------------------------------------------------------
// Pooling with floor semantics: trailing remainder along a pooled axis is
// dropped. Max-pool ties break toward the first index.
template <class T>
class MaxPool2d : public Layer<T> {
 public:
  MaxPool2d(int ph, int pw) : ph_(ph), pw_(pw) {
    if (ph <= 0 || pw <= 0) raise(ErrorCode::shape_error, "maxpool: non-positive size");
  }
  const char* kind() const override { return "maxpool"; }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 4) raise(ErrorCode::shape_error, "maxpool: expected NCHW");
    if (in[2] < ph_ || in[3] < pw_)
      raise(ErrorCode::shape_error, "maxpool: pool size exceeds input dimensions");
    return {in[0], in[1], in[2] / ph_, in[3] / pw_};
  }

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    const auto os = output_shape(x.shape);
    in_shape_ = x.shape;
    Tensor<T> y(os);
    argmax_.resize(y.data.size());
    const int h = x.dim(2), w = x.dim(3), oh = os[2], ow = os[3];
    const int planes = x.dim(0) * x.dim(1);
    for (int p = 0; p < planes; ++p) {
      const T* xp = x.ptr() + static_cast<size_t>(p) * h * w;
      T* yp = y.ptr() + static_cast<size_t>(p) * oh * ow;
      int32_t* am = argmax_.data() + static_cast<size_t>(p) * oh * ow;
      for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
          T best = xp[static_cast<size_t>(i * ph_) * w + j * pw_];
          int32_t best_idx = i * ph_ * w + j * pw_;
          for (int di = 0; di < ph_; ++di)
            for (int dj = 0; dj < pw_; ++dj) {
              const int32_t idx = (i * ph_ + di) * w + (j * pw_ + dj);
              if (xp[idx] > best) {
                best = xp[idx];
                best_idx = idx;
              }
            }
          yp[static_cast<size_t>(i) * ow + j] = best;
          am[static_cast<size_t>(i) * ow + j] = best_idx;
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(in_shape_);
    const int h = in_shape_[2], w = in_shape_[3];
    const int oh = gy.dim(2), ow = gy.dim(3);
    const int planes = gy.dim(0) * gy.dim(1);
    for (int p = 0; p < planes; ++p) {
      const T* gp = gy.ptr() + static_cast<size_t>(p) * oh * ow;
      T* gxp = gx.ptr() + static_cast<size_t>(p) * h * w;
      const int32_t* am = argmax_.data() + static_cast<size_t>(p) * oh * ow;
      for (int64_t i = 0; i < static_cast<int64_t>(oh) * ow; ++i) gxp[am[i]] += gp[i];
    }
    return gx;
  }

  nlohmann::json spec() const override { return {{"kind", "maxpool"}, {"ph", ph_}, {"pw", pw_}}; }

 private:
  int ph_, pw_;
  std::vector<int> in_shape_;
  std::vector<int32_t> argmax_;
};

template <class T>
class AvgPool2d : public Layer<T> {
 public:
  AvgPool2d(int ph, int pw) : ph_(ph), pw_(pw) {
    if (ph <= 0 || pw <= 0) raise(ErrorCode::shape_error, "avgpool: non-positive size");
  }
  const char* kind() const override { return "avgpool"; }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 4) raise(ErrorCode::shape_error, "avgpool: expected NCHW");
    if (in[2] < ph_ || in[3] < pw_)
      raise(ErrorCode::shape_error, "avgpool: pool size exceeds input dimensions");
    return {in[0], in[1], in[2] / ph_, in[3] / pw_};
  }

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    const auto os = output_shape(x.shape);
    in_shape_ = x.shape;
    Tensor<T> y(os);
    const int h = x.dim(2), w = x.dim(3), oh = os[2], ow = os[3];
    const int planes = x.dim(0) * x.dim(1);
    const T inv = T(1) / static_cast<T>(ph_ * pw_);
    for (int p = 0; p < planes; ++p) {
      const T* xp = x.ptr() + static_cast<size_t>(p) * h * w;
      T* yp = y.ptr() + static_cast<size_t>(p) * oh * ow;
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          T acc = T(0);
          for (int di = 0; di < ph_; ++di)
            for (int dj = 0; dj < pw_; ++dj)
              acc += xp[static_cast<size_t>(i * ph_ + di) * w + (j * pw_ + dj)];
          yp[static_cast<size_t>(i) * ow + j] = acc * inv;
        }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(in_shape_);
    const int h = in_shape_[2], w = in_shape_[3];
    const int oh = gy.dim(2), ow = gy.dim(3);
    const int planes = gy.dim(0) * gy.dim(1);
    const T inv = T(1) / static_cast<T>(ph_ * pw_);
    for (int p = 0; p < planes; ++p) {
      const T* gp = gy.ptr() + static_cast<size_t>(p) * oh * ow;
      T* gxp = gx.ptr() + static_cast<size_t>(p) * h * w;
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          const T v = gp[static_cast<size_t>(i) * ow + j] * inv;
          for (int di = 0; di < ph_; ++di)
            for (int dj = 0; dj < pw_; ++dj)
              gxp[static_cast<size_t>(i * ph_ + di) * w + (j * pw_ + dj)] += v;
        }
    }
    return gx;
  }

  nlohmann::json spec() const override { return {{"kind", "avgpool"}, {"ph", ph_}, {"pw", pw_}}; }

 private:
  int ph_, pw_;
  std::vector<int> in_shape_;
};

// ---------------------------------------------------------------------------
template <class T>
class Linear : public Layer<T> {
 public:
  Linear(int in_features, int out_features)
      : d_(in_features), f_(out_features), w_({out_features, in_features}), b_({out_features}),
        gw_({out_features, in_features}), gb_({out_features}) {}

  const char* kind() const override { return "linear"; }

  void init(Rng& rng) override {
    const double bound = std::sqrt(6.0 / d_);
    for (auto& v : w_.data) v = static_cast<T>(rng.uniform(-bound, bound));
    const double bb = 1.0 / std::sqrt(static_cast<double>(d_));
    for (auto& v : b_.data) v = static_cast<T>(rng.uniform(-bb, bb));
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 2 || in[1] != d_)
      raise(ErrorCode::shape_error, "linear: expected [N x " + std::to_string(d_) + "] input, got " +
                                        shape_string(in));
    return {in[0], f_};
  }

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    (void)output_shape(x.shape);
    x_ = x;
    const int n = x.dim(0);
    Tensor<T> y({n, f_});
    gemm_nt<T>(x.ptr(), w_.ptr(), y.ptr(), n, f_, d_);
    for (int s = 0; s < n; ++s)
      for (int j = 0; j < f_; ++j) y.data[static_cast<size_t>(s) * f_ + j] += b_.data[j];
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const int n = x_.dim(0);
    // dW += gy^T x ; db += column sums ; dx = gy W
    gemm_tn<T>(gy.ptr(), x_.ptr(), gw_.ptr(), f_, d_, n, /*accumulate=*/true);
    for (int s = 0; s < n; ++s)
      for (int j = 0; j < f_; ++j) gb_.data[j] += gy.data[static_cast<size_t>(s) * f_ + j];
    Tensor<T> gx(x_.shape);
    gemm_nn<T>(gy.ptr(), w_.ptr(), gx.ptr(), n, d_, f_);
    return gx;
  }

  std::vector<Tensor<T>*> params() override { return {&w_, &b_}; }
  std::vector<Tensor<T>*> grads() override { return {&gw_, &gb_}; }

  nlohmann::json spec() const override {
    return {{"kind", "linear"}, {"in", d_}, {"out", f_}};
  }

 private:
  int d_, f_;
  Tensor<T> w_, b_, gw_, gb_;
  Tensor<T> x_;
};

// ---------------------------------------------------------------------------
// Bridge from the conv stack to the recurrent stack: the remaining time axis
// (W) becomes the sequence, everything else flattens into features.
// [N x C x H x W] -> [W x N x C*H]
template <class T>
class ConvToSeq : public Layer<T> {
 public:
  const char* kind() const override { return "conv_to_seq"; }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 4) raise(ErrorCode::shape_error, "conv_to_seq: expected NCHW");
    return {in[3], in[0], in[1] * in[2]};
  }

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    in_shape_ = x.shape;
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    Tensor<T> y({w, n, c * h});
    for (int s = 0; s < n; ++s)
      for (int ci = 0; ci < c; ++ci)
        for (int hi = 0; hi < h; ++hi) {
          const T* src = x.ptr() + ((static_cast<size_t>(s) * c + ci) * h + hi) * w;
          for (int t = 0; t < w; ++t)
            y.data[(static_cast<size_t>(t) * n + s) * (c * h) + ci * h + hi] = src[t];
        }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const int n = in_shape_[0], c = in_shape_[1], h = in_shape_[2], w = in_shape_[3];
    Tensor<T> gx(in_shape_);
    for (int s = 0; s < n; ++s)
      for (int ci = 0; ci < c; ++ci)
        for (int hi = 0; hi < h; ++hi) {
          T* dst = gx.ptr() + ((static_cast<size_t>(s) * c + ci) * h + hi) * w;
          for (int t = 0; t < w; ++t)
            dst[t] = gy.data[(static_cast<size_t>(t) * n + s) * (c * h) + ci * h + hi];
        }
    return gx;
  }

  nlohmann::json spec() const override { return {{"kind", "conv_to_seq"}}; }

 private:
  std::vector<int> in_shape_;
};

// [T x N x H] -> [N x H], keeping the final step.
template <class T>
class TakeLastStep : public Layer<T> {
 public:
  const char* kind() const override { return "take_last"; }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 3) raise(ErrorCode::shape_error, "take_last: expected TNH");
    return {in[1], in[2]};
  }

  Tensor<T> forward(const Tensor<T>& x, bool) override {
    in_shape_ = x.shape;
    const int t = x.dim(0), n = x.dim(1), h = x.dim(2);
    Tensor<T> y({n, h});
    const T* last = x.ptr() + static_cast<size_t>(t - 1) * n * h;
    std::copy(last, last + static_cast<size_t>(n) * h, y.ptr());
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(in_shape_);
    const int t = in_shape_[0], n = in_shape_[1], h = in_shape_[2];
    T* last = gx.ptr() + static_cast<size_t>(t - 1) * n * h;
    std::copy(gy.ptr(), gy.ptr() + static_cast<size_t>(n) * h, last);
    return gx;
  }

  nlohmann::json spec() const override { return {{"kind", "take_last"}}; }

 private:
  std::vector<int> in_shape_;
};

}  // namespace fatigue::nn
