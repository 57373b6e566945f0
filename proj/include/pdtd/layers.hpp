// Copyright 2026 The pdtd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PDTD_LAYERS_HPP_
#define PDTD_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "pdtd/blas.hpp"
#include "pdtd/rng.hpp"
#include "pdtd/tensor.hpp"

namespace pdtd {

template <typename T>
struct ParamView {
  T* data;
  size_t size;
};

// Reusable buffers for the im2col/gemm path. One per thread; layers never
// allocate inside the hot loop.
template <typename T>
struct Scratch {
  std::vector<T> col, col2, buf;

  T* ensure(std::vector<T>& v, size_t n) {
    if (v.size() < n) v.resize(n);
    return v.data();
  }
};

// col has shape [ch*k*k, oh*ow]; out-of-image taps read as zero.
template <typename T>
void im2col(const T* im, int ch, int h, int w, int k, int stride, int pad,
            int oh, int ow, T* col) {
  for (int c = 0; c < ch; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        T* dst = col + ((static_cast<size_t>(c) * k + kh) * k + kw) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + kh;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + ow, T(0));
            dst += ow;
            continue;
          }
          const T* src = im + (static_cast<size_t>(c) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kw;
            *dst++ = (ix >= 0 && ix < w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

// Scatters col back into im (accumulating); caller zeroes im first.
template <typename T>
void col2im(const T* col, int ch, int h, int w, int k, int stride, int pad,
            int oh, int ow, T* im) {
  for (int c = 0; c < ch; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const T* src = col + ((static_cast<size_t>(c) * k + kh) * k + kw) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + kh;
          if (iy < 0 || iy >= h) {
            src += ow;
            continue;
          }
          T* dst = im + (static_cast<size_t>(c) * h + iy) * w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kw;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
          src += ow;
        }
      }
    }
  }
}

template <typename T>
class Conv2d {
 private:
  int in_ch_ = 0, out_ch_ = 0, ksize_ = 0, stride_ = 1, pad_ = 0;

 public:
  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad)
      : in_ch_(in_ch), out_ch_(out_ch), ksize_(ksize), stride_(stride),
        pad_(pad),
        weight(static_cast<size_t>(out_ch) * in_ch * ksize * ksize, T(0)),
        bias(out_ch, T(0)) {}

  void init_params(Rng& rng) {
    // Xavier-uniform, zero bias.
    const double fan_in = static_cast<double>(in_ch_) * ksize_ * ksize_;
    const double fan_out = static_cast<double>(out_ch_) * ksize_ * ksize_;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : weight) v = static_cast<T>(rng.uniform(-limit, limit));
    std::fill(bias.begin(), bias.end(), T(0));
  }

  int out_dim(int in) const { return (in + 2 * pad_ - ksize_) / stride_ + 1; }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }

  Tensor<T> forward(const Tensor<T>& x, Scratch<T>& s) const {
    if (x.channels() != in_ch_) {
      throw std::invalid_argument("Conv2d: channel mismatch " + x.shape_str());
    }
    const int oh = out_dim(x.height()), ow = out_dim(x.width());
    if (oh <= 0 || ow <= 0) throw std::invalid_argument("Conv2d: input too small");
    const int kk = in_ch_ * ksize_ * ksize_;
    const int n = oh * ow;
    T* col = s.ensure(s.col, static_cast<size_t>(kk) * n);
    im2col(x.data(), in_ch_, x.height(), x.width(), ksize_, stride_, pad_, oh,
           ow, col);
    Tensor<T> y(out_ch_, oh, ow);
    for (int c = 0; c < out_ch_; ++c) {
      std::fill(y.channel(c), y.channel(c) + n, bias[c]);
    }
    gemm(false, false, out_ch_, n, kk, T(1), weight.data(), kk, col, n, T(1),
         y.data(), n);
    return y;
  }

  // Accumulates parameter gradients into `grad` and returns dL/dx.
  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gy, Conv2d<T>& grad,
                     Scratch<T>& s) const {
    const int oh = gy.height(), ow = gy.width();
    const int kk = in_ch_ * ksize_ * ksize_;
    const int n = oh * ow;
    T* col = s.ensure(s.col, static_cast<size_t>(kk) * n);
    im2col(x.data(), in_ch_, x.height(), x.width(), ksize_, stride_, pad_, oh,
           ow, col);
    // dW += gy . col^T
    gemm(false, true, out_ch_, kk, n, T(1), gy.data(), n, col, n, T(1),
         grad.weight.data(), kk);
    for (int c = 0; c < out_ch_; ++c) {
      T acc = T(0);
      const T* g = gy.channel(c);
      for (int i = 0; i < n; ++i) acc += g[i];
      grad.bias[c] += acc;
    }
    // dX = col2im(W^T . gy)
    T* colg = s.ensure(s.col2, static_cast<size_t>(kk) * n);
    gemm(true, false, kk, n, out_ch_, T(1), weight.data(), kk, gy.data(), n,
         T(0), colg, n);
    Tensor<T> gx(in_ch_, x.height(), x.width());
    col2im(colg, in_ch_, x.height(), x.width(), ksize_, stride_, pad_, oh, ow,
           gx.data());
    return gx;
  }

  void collect(std::vector<ParamView<T>>& out) {
    out.push_back({weight.data(), weight.size()});
    out.push_back({bias.data(), bias.size()});
  }

  std::vector<T> weight;  // [out_ch, in_ch*k*k]
  std::vector<T> bias;    // [out_ch]
};

// Stride-s transposed convolution; output size (in-1)*s - 2p + k + out_pad.
template <typename T>
class ConvTranspose2d {
 private:
  int in_ch_ = 0, out_ch_ = 0, ksize_ = 0, stride_ = 1, pad_ = 0, out_pad_ = 0;

 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(int in_ch, int out_ch, int ksize, int stride, int pad,
                  int out_pad)
      : in_ch_(in_ch), out_ch_(out_ch), ksize_(ksize), stride_(stride),
        pad_(pad), out_pad_(out_pad),
        weight(static_cast<size_t>(in_ch) * out_ch * ksize * ksize, T(0)),
        bias(out_ch, T(0)) {}

  void init_params(Rng& rng) {
    const double fan_in = static_cast<double>(in_ch_) * ksize_ * ksize_;
    const double fan_out = static_cast<double>(out_ch_) * ksize_ * ksize_;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : weight) v = static_cast<T>(rng.uniform(-limit, limit));
    std::fill(bias.begin(), bias.end(), T(0));
  }

  int out_dim(int in) const {
    return (in - 1) * stride_ - 2 * pad_ + ksize_ + out_pad_;
  }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }

  Tensor<T> forward(const Tensor<T>& x, Scratch<T>& s) const {
    if (x.channels() != in_ch_) {
      throw std::invalid_argument("ConvTranspose2d: channel mismatch " +
                                  x.shape_str());
    }
    const int oh = out_dim(x.height()), ow = out_dim(x.width());
    const int kk = out_ch_ * ksize_ * ksize_;
    const int n_in = x.plane();
    // col = W^T . x, then scatter with the geometry of the mirrored conv
    // (output plays the role of the conv input).
    T* col = s.ensure(s.col, static_cast<size_t>(kk) * n_in);
    gemm(true, false, kk, n_in, in_ch_, T(1), weight.data(), kk, x.data(),
         n_in, T(0), col, n_in);
    Tensor<T> y(out_ch_, oh, ow);
    col2im(col, out_ch_, oh, ow, ksize_, stride_, pad_, x.height(), x.width(),
           y.data());
    for (int c = 0; c < out_ch_; ++c) {
      T* p = y.channel(c);
      for (int i = 0; i < y.plane(); ++i) p[i] += bias[c];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gy,
                     ConvTranspose2d<T>& grad, Scratch<T>& s) const {
    const int kk = out_ch_ * ksize_ * ksize_;
    const int n_in = x.plane();
    T* colg = s.ensure(s.col, static_cast<size_t>(kk) * n_in);
    im2col(gy.data(), out_ch_, gy.height(), gy.width(), ksize_, stride_, pad_,
           x.height(), x.width(), colg);
    // dX = W . im2col(gy)
    Tensor<T> gx(in_ch_, x.height(), x.width());
    gemm(false, false, in_ch_, n_in, kk, T(1), weight.data(), kk, colg, n_in,
         T(0), gx.data(), n_in);
    // dW += x . im2col(gy)^T
    gemm(false, true, in_ch_, kk, n_in, T(1), x.data(), n_in, colg, n_in, T(1),
         grad.weight.data(), kk);
    for (int c = 0; c < out_ch_; ++c) {
      T acc = T(0);
      const T* g = gy.channel(c);
      for (int i = 0; i < gy.plane(); ++i) acc += g[i];
      grad.bias[c] += acc;
    }
    return gx;
  }

  void collect(std::vector<ParamView<T>>& out) {
    out.push_back({weight.data(), weight.size()});
    out.push_back({bias.data(), bias.size()});
  }

  std::vector<T> weight;  // [in_ch, out_ch*k*k]
  std::vector<T> bias;    // [out_ch]
};

constexpr double kGdnBetaMin = 1e-6;

// Generalized divisive normalization across channels:
//   gdn:  y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2)
//   igdn: y_i = x_i * sqrt(beta_i + sum_j gamma_ij x_j^2)
template <typename T>
class Gdn {
 private:
  int channels_ = 0;
  bool inverse_ = false;

 public:
  Gdn() = default;
  Gdn(int channels, bool inverse)
      : channels_(channels), inverse_(inverse),
        beta(channels, T(1)),
        gamma(static_cast<size_t>(channels) * channels, T(0)) {
    for (int i = 0; i < channels; ++i) {
      gamma[static_cast<size_t>(i) * channels + i] = T(0.1);
    }
  }

  int channels() const { return channels_; }
  bool inverse() const { return inverse_; }

  // Returns z_i(n) = beta_i + sum_j gamma_ij x_j(n)^2.
  Tensor<T> pool(const Tensor<T>& x, Scratch<T>& s) const {
    const int n = x.plane();
    T* sq = s.ensure(s.buf, static_cast<size_t>(channels_) * n);
    const T* xd = x.data();
    for (size_t i = 0; i < static_cast<size_t>(channels_) * n; ++i) {
      sq[i] = xd[i] * xd[i];
    }
    Tensor<T> z(channels_, x.height(), x.width());
    for (int c = 0; c < channels_; ++c) {
      std::fill(z.channel(c), z.channel(c) + n, beta[c]);
    }
    gemm(false, false, channels_, n, channels_, T(1), gamma.data(), channels_,
         sq, n, T(1), z.data(), n);
    return z;
  }

  Tensor<T> forward(const Tensor<T>& x, Scratch<T>& s) const {
    if (x.channels() != channels_) {
      throw std::invalid_argument("Gdn: channel mismatch " + x.shape_str());
    }
    Tensor<T> z = pool(x, s);
    Tensor<T> y(channels_, x.height(), x.width());
    const size_t total = x.size();
    for (size_t i = 0; i < total; ++i) {
      const T sq = std::sqrt(z[i]);
      y[i] = inverse_ ? x[i] * sq : x[i] / sq;
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gy, Gdn<T>& grad,
                     Scratch<T>& s) const {
    const int n = x.plane();
    const size_t total = x.size();
    Tensor<T> z = pool(x, s);
    // q_i = dL/dz_i
    Tensor<T> q(channels_, x.height(), x.width());
    Tensor<T> gx(channels_, x.height(), x.width());
    for (size_t i = 0; i < total; ++i) {
      const T sq = std::sqrt(z[i]);
      if (inverse_) {
        q[i] = T(0.5) * gy[i] * x[i] / sq;
        gx[i] = gy[i] * sq;
      } else {
        q[i] = T(-0.5) * gy[i] * x[i] / (z[i] * sq);
        gx[i] = gy[i] / sq;
      }
    }
    for (int c = 0; c < channels_; ++c) {
      T acc = T(0);
      const T* qc = q.channel(c);
      for (int i = 0; i < n; ++i) acc += qc[i];
      grad.beta[c] += acc;
    }
    // dGamma_ij += sum_n q_i x_j^2 ; dx_k += 2 x_k (gamma^T q)_k
    T* sq = s.ensure(s.buf, total);
    for (size_t i = 0; i < total; ++i) sq[i] = x[i] * x[i];
    gemm(false, true, channels_, channels_, n, T(1), q.data(), n, sq, n, T(1),
         grad.gamma.data(), channels_);
    T* t = s.ensure(s.col, total);
    gemm(true, false, channels_, n, channels_, T(1), gamma.data(), channels_,
         q.data(), n, T(0), t, n);
    for (size_t i = 0; i < total; ++i) gx[i] += T(2) * x[i] * t[i];
    return gx;
  }

  void project() {
    for (auto& b : beta) b = std::max(b, T(kGdnBetaMin));
    for (auto& g : gamma) g = std::max(g, T(0));
  }

  void collect(std::vector<ParamView<T>>& out) {
    out.push_back({beta.data(), beta.size()});
    out.push_back({gamma.data(), gamma.size()});
  }

  std::vector<T> beta;   // [C]
  std::vector<T> gamma;  // [C, C] row-major, row = output channel
};

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y(x.channels(), x.height(), x.width());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& gy) {
  Tensor<T> gx(x.channels(), x.height(), x.width());
  for (size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > T(0) ? gy[i] : T(0);
  return gx;
}

template <typename T>
Tensor<T> abs_forward(const Tensor<T>& x) {
  Tensor<T> y(x.channels(), x.height(), x.width());
  for (size_t i = 0; i < x.size(); ++i) y[i] = std::abs(x[i]);
  return y;
}

template <typename T>
Tensor<T> abs_backward(const Tensor<T>& x, const Tensor<T>& gy) {
  Tensor<T> gx(x.channels(), x.height(), x.width());
  for (size_t i = 0; i < x.size(); ++i) {
    gx[i] = x[i] > T(0) ? gy[i] : (x[i] < T(0) ? -gy[i] : T(0));
  }
  return gx;
}

template <typename T>
T softplus(T x) {
  return (x > T(0) ? x : T(0)) + std::log1p(std::exp(-std::abs(x)));
}

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace pdtd

#endif  // PDTD_LAYERS_HPP_
