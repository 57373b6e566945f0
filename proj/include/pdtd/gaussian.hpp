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

#ifndef PDTD_GAUSSIAN_HPP_
#define PDTD_GAUSSIAN_HPP_

#include <cmath>
#include <vector>

#include "pdtd/tensor.hpp"
#include "pdtd/transforms.hpp"

namespace pdtd {

// Likelihoods below this are clamped (and their gradients cut); keeps
// -log2 p bounded by 16 bits.
constexpr double kLikelihoodFloor = 1.0 / 65536.0;

constexpr double kSigmaTableMax = 256.0;
constexpr int kScaleTableSize = 64;

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014326779;
}

// Mass of N(0, sigma^2) on the unit bin centered at v. Computed in double
// regardless of T; erf dominates the cost anyway.
template <typename T>
T gaussian_bin_mass(T v, T sigma) {
  const double s = static_cast<double>(sigma);
  const double hi = (static_cast<double>(v) + 0.5) / s;
  const double lo = (static_cast<double>(v) - 0.5) / s;
  const double p = 0.5 * (std::erf(hi * M_SQRT1_2) - std::erf(lo * M_SQRT1_2));
  return static_cast<T>(std::max(p, kLikelihoodFloor));
}

template <typename T>
Tensor<T> gaussian_bin_likelihood(const Tensor<T>& y_hat, const Tensor<T>& sigma) {
  if (!y_hat.same_shape(sigma)) {
    throw std::invalid_argument("gaussian_bin_likelihood: shape mismatch");
  }
  Tensor<T> p(y_hat.channels(), y_hat.height(), y_hat.width());
  for (size_t i = 0; i < y_hat.size(); ++i) {
    p[i] = gaussian_bin_mass(y_hat[i], sigma[i]);
  }
  return p;
}

// d p / d y_hat and d p / d sigma; zero where the floor is active.
template <typename T>
void gaussian_bin_likelihood_backward(const Tensor<T>& y_hat,
                                      const Tensor<T>& sigma,
                                      const Tensor<T>& p, const Tensor<T>& gp,
                                      Tensor<T>& gy, Tensor<T>& gsigma) {
  for (size_t i = 0; i < y_hat.size(); ++i) {
    if (static_cast<double>(p[i]) <= kLikelihoodFloor) {
      gy[i] = T(0);
      gsigma[i] = T(0);
      continue;
    }
    const double s = static_cast<double>(sigma[i]);
    const double hi = (static_cast<double>(y_hat[i]) + 0.5) / s;
    const double lo = (static_cast<double>(y_hat[i]) - 0.5) / s;
    const double phi_hi = std_normal_pdf(hi);
    const double phi_lo = std_normal_pdf(lo);
    gy[i] = static_cast<T>(static_cast<double>(gp[i]) * (phi_hi - phi_lo) / s);
    gsigma[i] = static_cast<T>(-static_cast<double>(gp[i]) *
                               (phi_hi * hi - phi_lo * lo) / s);
  }
}

// 64 geometrically spaced scales spanning [kSigmaMin, kSigmaTableMax].
inline std::vector<double> make_scale_table() {
  std::vector<double> t(kScaleTableSize);
  const double lo = std::log(kSigmaMin), hi = std::log(kSigmaTableMax);
  for (int i = 0; i < kScaleTableSize; ++i) {
    t[i] = std::exp(lo + (hi - lo) * i / (kScaleTableSize - 1));
  }
  t.front() = kSigmaMin;
  t.back() = kSigmaTableMax;
  return t;
}

// Nearest-upper quantization: smallest table entry >= sigma (last entry when
// sigma exceeds the table). Encoder and decoder must agree bit for bit; both
// call this on identical sigma values.
inline int scale_index(double sigma, const std::vector<double>& table) {
  int lo = 0, hi = static_cast<int>(table.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (table[mid] >= sigma) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace pdtd

#endif  // PDTD_GAUSSIAN_HPP_
