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

#include "pdtd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pdtd {

double psnr(const Tensor<float>& a, const Tensor<float>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  double se = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01, kK2 = 0.03;
constexpr double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

// One image plane in double precision.
struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
  double& at(int y, int x) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

std::vector<double> gaussian_window() {
  std::vector<double> g(kWindow);
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - (kWindow - 1) / 2.0;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += g[i];
  }
  for (auto& x : g) x /= sum;
  return g;
}

// Separable valid convolution with the 11-tap window.
Plane conv_valid(const Plane& p, const std::vector<double>& win) {
  Plane tmp;
  tmp.h = p.h;
  tmp.w = p.w - kWindow + 1;
  tmp.v.resize(static_cast<size_t>(tmp.h) * tmp.w);
  for (int y = 0; y < tmp.h; ++y) {
    for (int x = 0; x < tmp.w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += win[k] * p.at(y, x + k);
      tmp.at(y, x) = acc;
    }
  }
  Plane out;
  out.h = p.h - kWindow + 1;
  out.w = tmp.w;
  out.v.resize(static_cast<size_t>(out.h) * out.w);
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += win[k] * tmp.at(y + k, x);
      out.at(y, x) = acc;
    }
  }
  return out;
}

// 2x2 mean pooling with symmetric (edge-replicate) padding of odd dims.
Plane downsample(const Plane& p) {
  const int ph = p.h + (p.h % 2), pw = p.w + (p.w % 2);
  Plane out;
  out.h = ph / 2;
  out.w = pw / 2;
  out.v.resize(static_cast<size_t>(out.h) * out.w);
  auto sample = [&](int y, int x) {
    return p.at(std::min(y, p.h - 1), std::min(x, p.w - 1));
  };
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      out.at(y, x) = 0.25 * (sample(2 * y, 2 * x) + sample(2 * y, 2 * x + 1) +
                             sample(2 * y + 1, 2 * x) +
                             sample(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

// Mean luminance and contrast-structure terms over the valid window grid.
void ssim_terms(const Plane& a, const Plane& b, const std::vector<double>& win,
                double* luminance, double* cs) {
  const double c1 = kK1 * kK1, c2 = kK2 * kK2;
  Plane aa = a, bb = b, ab = a;
  for (size_t i = 0; i < a.v.size(); ++i) {
    aa.v[i] = a.v[i] * a.v[i];
    bb.v[i] = b.v[i] * b.v[i];
    ab.v[i] = a.v[i] * b.v[i];
  }
  const Plane mu1 = conv_valid(a, win);
  const Plane mu2 = conv_valid(b, win);
  const Plane m11 = conv_valid(aa, win);
  const Plane m22 = conv_valid(bb, win);
  const Plane m12 = conv_valid(ab, win);
  double lum_acc = 0.0, cs_acc = 0.0;
  for (size_t i = 0; i < mu1.v.size(); ++i) {
    const double u1 = mu1.v[i], u2 = mu2.v[i];
    const double s11 = m11.v[i] - u1 * u1;
    const double s22 = m22.v[i] - u2 * u2;
    const double s12 = m12.v[i] - u1 * u2;
    lum_acc += (2.0 * u1 * u2 + c1) / (u1 * u1 + u2 * u2 + c1);
    cs_acc += (2.0 * s12 + c2) / (s11 + s22 + c2);
  }
  *luminance = lum_acc / static_cast<double>(mu1.v.size());
  *cs = cs_acc / static_cast<double>(mu1.v.size());
}

}  // namespace

double ms_ssim(const Tensor<float>& a, const Tensor<float>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ms_ssim: shape mismatch");
  if (a.channels() != 3) throw std::invalid_argument("ms_ssim: need 3 channels");
  if (std::min(a.height(), a.width()) < kMsSsimMinDim) {
    throw std::invalid_argument(
        "ms_ssim: min dimension " + std::to_string(kMsSsimMinDim) +
        " required for 5 scales, got " +
        std::to_string(std::min(a.height(), a.width())));
  }
  const auto win = gaussian_window();

  double result = 0.0;
  for (int c = 0; c < 3; ++c) {
    Plane pa, pb;
    pa.h = pb.h = a.height();
    pa.w = pb.w = a.width();
    pa.v.resize(a.size() / 3);
    pb.v.resize(b.size() / 3);
    for (size_t i = 0; i < pa.v.size(); ++i) {
      pa.v[i] = a.channel(c)[i];
      pb.v[i] = b.channel(c)[i];
    }
    double channel_score = 1.0;
    for (int scale = 0; scale < 5; ++scale) {
      if (scale > 0) {
        pa = downsample(pa);
        pb = downsample(pb);
      }
      double lum = 0.0, cs = 0.0;
      ssim_terms(pa, pb, win, &lum, &cs);
      if (scale < 4) {
        channel_score *= std::pow(std::max(cs, 0.0), kWeights[scale]);
      } else {
        channel_score *= std::pow(std::max(lum * cs, 0.0), kWeights[scale]);
      }
    }
    result += channel_score / 3.0;
  }
  return result;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman_rho: need two equal-length series");
  }
  auto ranks = [](std::span<const double> v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return v[i] < v[j]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (i + j) / 2.0 + 1.0;  // average rank for ties
      for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 1.0;  // constant series: treat as ordered
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace pdtd
