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

#ifndef PDTD_DTD_HPP_
#define PDTD_DTD_HPP_

#include <cmath>
#include <utility>

#include "pdtd/config.hpp"
#include "pdtd/rng.hpp"
#include "pdtd/tensor.hpp"

namespace pdtd {

// One keep-fraction draw, shared by both bottlenecks. Sampled per image,
// never per batch.
struct DropPlan {
  double keep_fraction = 1.0;
  int keep_lat = 0;
  int keep_hp = 0;
};

inline int keep_channels(double fraction, int channels) {
  const int k = static_cast<int>(std::ceil(fraction * channels));
  return std::min(std::max(k, 0), channels);
}

// A single draw f ~ U(u1, u2) drives both cutoffs (ceil of the same
// fraction), so the two bottlenecks always truncate at matched levels.
inline DropPlan sample_drop_plan(Rng& rng, const ModelConfig& cfg) {
  DropPlan plan;
  plan.keep_fraction = cfg.u1 == cfg.u2 ? cfg.u1 : rng.uniform(cfg.u1, cfg.u2);
  plan.keep_lat = keep_channels(plan.keep_fraction, cfg.c_lat);
  plan.keep_hp = keep_channels(plan.keep_fraction, cfg.c_hp);
  return plan;
}

// Zeroes channels [keep, C). Gradients through the zeroed region are cut by
// masking the upstream gradient with the same cutoff.
template <typename T>
void mask_tail(Tensor<T>& t, int keep) {
  if (keep >= t.channels()) return;
  T* p = t.channel(keep);
  std::fill(p, p + static_cast<size_t>(t.channels() - keep) * t.plane(), T(0));
}

template <typename T>
Tensor<T> masked_copy(const Tensor<T>& t, int keep) {
  Tensor<T> out = t;
  mask_tail(out, keep);
  return out;
}

// Overwrites likelihoods of dropped channels with 1, so they contribute
// exactly zero bits to the rate.
template <typename T>
void mask_likelihood(Tensor<T>& p, int keep) {
  if (keep >= p.channels()) return;
  T* d = p.channel(keep);
  std::fill(d, d + static_cast<size_t>(p.channels() - keep) * p.plane(), T(1));
}

// Rate of one image in bits per pixel: sum of -log2 p over the kept region,
// divided by the pixel count of the input image. Dropped entries are set to
// 1 before the sum, so their contribution is exactly 0 bits.
template <typename T>
std::pair<double, double> masked_rate(const Tensor<T>& p_y,
                                      const Tensor<T>& p_z,
                                      const DropPlan& plan, int pixels) {
  const double inv_ln2 = 1.4426950408889634074;
  auto bits = [&](const Tensor<T>& p, int keep) {
    Tensor<T> m = p;
    mask_likelihood(m, keep);
    double sum = 0.0;
    for (size_t i = 0; i < m.size(); ++i) {
      sum += -std::log(static_cast<double>(m[i])) * inv_ln2;
    }
    return sum;
  };
  return {bits(p_y, plan.keep_lat) / pixels, bits(p_z, plan.keep_hp) / pixels};
}

}  // namespace pdtd

#endif  // PDTD_DTD_HPP_
