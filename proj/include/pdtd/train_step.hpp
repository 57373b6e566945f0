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

#ifndef PDTD_TRAIN_STEP_HPP_
#define PDTD_TRAIN_STEP_HPP_

#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pdtd/dtd.hpp"
#include "pdtd/gaussian.hpp"
#include "pdtd/model.hpp"
#include "pdtd/quantize.hpp"

namespace pdtd {

// Distortion term scale: MSE on [0,1] images multiplied by 255^2, matching
// the convention under which lambda in {0.01, 0.05} gives sane trade-offs.
constexpr double kDistortionScale = 255.0 * 255.0;

struct LossBreakdown {
  double rate_y_bpp = 0.0;
  double rate_z_bpp = 0.0;
  double distortion_mse = 0.0;
  double total = 0.0;
};

// Distinct noise/plan streams per (step, image); resume-safe because the
// draws depend only on these identifiers, not on generator history.
struct StepStreams {
  static constexpr uint64_t kPlan = 0xd701;
  static constexpr uint64_t kNoiseZ = 0xd702;
  static constexpr uint64_t kNoiseY = 0xd703;
};

// One image through the double-tail-drop pipeline (Algorithm 1 ordering:
// both bottlenecks are computed, then masked, then quantized; sigma comes
// from the masked noisy hyperlatent). Returns per-image loss parts and
// accumulates parameter gradients scaled by `weight`.
template <typename T>
LossBreakdown dtd_image_pass(const HyperpriorModel<T>& model,
                             const Tensor<T>& x, const DropPlan& plan,
                             uint64_t step_seed, int image_index,
                             double weight, HyperpriorModel<T>* grads,
                             Scratch<T>& s) {
  const ModelConfig& cfg = model.cfg;
  const int pixels = x.height() * x.width();
  const double inv_ln2 = 1.4426950408889634074;

  Rng rng_z(mix64(step_seed, StepStreams::kNoiseZ, image_index));
  Rng rng_y(mix64(step_seed, StepStreams::kNoiseY, image_index));

  typename AnalysisTransform<T>::Trace tr_ga;
  typename HyperAnalysisTransform<T>::Trace tr_ha;
  typename HyperSynthesisTransform<T>::Trace tr_hs;
  typename SynthesisTransform<T>::Trace tr_gs;

  // forward
  Tensor<T> y = model.ga.forward(x, s, grads ? &tr_ga : nullptr);
  Tensor<T> z = model.ha.forward(y, s, grads ? &tr_ha : nullptr);
  Tensor<T> y_masked = masked_copy(y, plan.keep_lat);
  Tensor<T> z_masked = masked_copy(z, plan.keep_hp);
  Tensor<T> z_hat = quantize(z_masked, QuantizeMode::kNoise, &rng_z);
  Tensor<T> sigma = model.hs.forward(z_hat, s, grads ? &tr_hs : nullptr);
  Tensor<T> y_hat = quantize(y_masked, QuantizeMode::kNoise, &rng_y);
  Tensor<T> p_y = gaussian_bin_likelihood(y_hat, sigma);
  Tensor<T> p_z = model.prior.bin_likelihood(z_hat);
  Tensor<T> x_hat = model.gs.forward(y_hat, s, grads ? &tr_gs : nullptr);

  LossBreakdown out;
  auto [ry, rz] = masked_rate(p_y, p_z, plan, pixels);
  out.rate_y_bpp = ry;
  out.rate_z_bpp = rz;
  double se = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(x_hat[i]);
    se += d * d;
  }
  out.distortion_mse = se / static_cast<double>(x.size());
  out.total = out.rate_y_bpp + out.rate_z_bpp +
              cfg.lambda * kDistortionScale * out.distortion_mse;
  if (!grads) return out;

  // backward
  Tensor<T> gx_hat(x_hat.channels(), x_hat.height(), x_hat.width());
  const double mse_coef =
      weight * cfg.lambda * kDistortionScale * 2.0 / static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    gx_hat[i] = static_cast<T>(
        mse_coef * (static_cast<double>(x_hat[i]) - static_cast<double>(x[i])));
  }
  Tensor<T> gy_hat = model.gs.backward(tr_gs, gx_hat, grads->gs, s);

  // rate gradients; dropped channels contribute none
  const double rate_coef = -weight / (static_cast<double>(pixels));
  Tensor<T> gp_y(p_y.channels(), p_y.height(), p_y.width());
  const size_t kept_y = static_cast<size_t>(plan.keep_lat) * p_y.plane();
  for (size_t i = 0; i < p_y.size(); ++i) {
    gp_y[i] = i < kept_y
                  ? static_cast<T>(rate_coef * inv_ln2 / static_cast<double>(p_y[i]))
                  : T(0);
  }
  Tensor<T> gy_like(p_y.channels(), p_y.height(), p_y.width());
  Tensor<T> gsigma(p_y.channels(), p_y.height(), p_y.width());
  gaussian_bin_likelihood_backward(y_hat, sigma, p_y, gp_y, gy_like, gsigma);

  Tensor<T> gp_z(p_z.channels(), p_z.height(), p_z.width());
  const size_t kept_z = static_cast<size_t>(plan.keep_hp) * p_z.plane();
  for (size_t i = 0; i < p_z.size(); ++i) {
    gp_z[i] = i < kept_z
                  ? static_cast<T>(rate_coef * inv_ln2 / static_cast<double>(p_z[i]))
                  : T(0);
  }
  Tensor<T> gz_like(p_z.channels(), p_z.height(), p_z.width());
  model.prior.bin_likelihood_backward(z_hat, p_z, gp_z, grads->prior, gz_like);

  // y_hat feeds both the synthesis and its own rate term
  for (size_t i = 0; i < gy_hat.size(); ++i) gy_hat[i] += gy_like[i];

  Tensor<T> gz_hat = model.hs.backward(tr_hs, gsigma, grads->hs, s);
  for (size_t i = 0; i < gz_hat.size(); ++i) gz_hat[i] += gz_like[i];

  // additive noise passes gradients through; the mask cuts them
  mask_tail(gy_hat, plan.keep_lat);
  mask_tail(gz_hat, plan.keep_hp);

  // hyper path sees the unmasked latent (mask comes after both analyses)
  Tensor<T> gy_from_ha = model.ha.backward(tr_ha, gz_hat, grads->ha, s);
  for (size_t i = 0; i < gy_hat.size(); ++i) gy_hat[i] += gy_from_ha[i];

  model.ga.backward(tr_ga, gy_hat, grads->ga, s);
  return out;
}

// Batch step: per-image drop plans, gradients averaged over the batch.
// Images are processed on `threads` workers, each with its own gradient
// accumulator; partial gradients are reduced in worker order, so results do
// not depend on scheduling.
template <typename T>
LossBreakdown train_step(const HyperpriorModel<T>& model,
                         HyperpriorModel<T>& grads,
                         const std::vector<Tensor<T>>& batch,
                         uint64_t step_seed, int threads = 0) {
  const int b = static_cast<int>(batch.size());
  if (b == 0) throw std::invalid_argument("train_step: empty batch");
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  threads = std::max(1, std::min(threads, b));

  std::vector<DropPlan> plans(b);
  for (int i = 0; i < b; ++i) {
    Rng rng_plan(mix64(step_seed, StepStreams::kPlan, i));
    plans[i] = sample_drop_plan(rng_plan, model.cfg);
  }

  const double weight = 1.0 / b;
  std::vector<HyperpriorModel<T>> local;
  std::vector<LossBreakdown> parts(b);
  local.reserve(threads);
  for (int t = 0; t < threads; ++t) local.emplace_back(model.cfg);
  for (auto& l : local) l.zero_params();

  auto worker = [&](int t) {
    Scratch<T> s;
    for (int i = t; i < b; i += threads) {
      parts[i] = dtd_image_pass(model, batch[i], plans[i], step_seed, i,
                                weight, &local[t], s);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  auto gviews = grads.params();
  for (int t = 0; t < threads; ++t) {
    auto lviews = local[t].params();
    for (size_t v = 0; v < gviews.size(); ++v) {
      for (size_t i = 0; i < gviews[v].size; ++i) {
        gviews[v].data[i] += lviews[v].data[i];
      }
    }
  }

  LossBreakdown out;
  for (const auto& p : parts) {
    out.rate_y_bpp += p.rate_y_bpp * weight;
    out.rate_z_bpp += p.rate_z_bpp * weight;
    out.distortion_mse += p.distortion_mse * weight;
  }
  out.total = out.rate_y_bpp + out.rate_z_bpp +
              model.cfg.lambda * kDistortionScale * out.distortion_mse;
  if (!std::isfinite(out.total)) {
    throw std::runtime_error(
        "train_step: non-finite loss (rate_y=" + std::to_string(out.rate_y_bpp) +
        ", rate_z=" + std::to_string(out.rate_z_bpp) +
        ", mse=" + std::to_string(out.distortion_mse) + ")");
  }
  return out;
}

}  // namespace pdtd

#endif  // PDTD_TRAIN_STEP_HPP_
