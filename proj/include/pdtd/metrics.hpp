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

#ifndef PDTD_METRICS_HPP_
#define PDTD_METRICS_HPP_

#include <span>

#include "pdtd/tensor.hpp"

namespace pdtd {

// 10*log10(1/MSE) over [0,1] images; +infinity when identical.
double psnr(const Tensor<float>& a, const Tensor<float>& b);

// Five-scale MS-SSIM, Gaussian window 11 sigma 1.5, canonical scale weights
// (0.0448, 0.2856, 0.3001, 0.2363, 0.1333), valid-window statistics,
// channel-averaged. Requires min(H, W) >= 161 so the coarsest scale still
// admits the 11-tap window.
double ms_ssim(const Tensor<float>& a, const Tensor<float>& b);

constexpr int kMsSsimMinDim = 161;

// Spearman rank correlation with average-rank tie handling.
double spearman_rho(std::span<const double> x, std::span<const double> y);

}  // namespace pdtd

#endif  // PDTD_METRICS_HPP_
