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

#ifndef PDTD_FACTORIZED_HPP_
#define PDTD_FACTORIZED_HPP_

#include <cmath>
#include <vector>

#include "pdtd/gaussian.hpp"
#include "pdtd/layers.hpp"
#include "pdtd/rng.hpp"
#include "pdtd/tensor.hpp"

namespace pdtd {

// Learned univariate density per hyperlatent channel: a chain of four
// monotone affine+gate stages whose sigmoid is the CDF.
//
//   h_0 = [x]
//   u_k = softplus(M_k) h_k + b_k
//   h_{k+1} = u_k + tanh(a_k) * tanh(u_k)   for k < 3
//   logit(x) = u_3[0],  CDF(x) = sigmoid(logit(x))
//
// softplus keeps the matrices nonnegative and |tanh(a)| < 1, so the map is
// monotone in x and the CDF is a proper distribution function.
template <typename T>
class FactorizedPrior {
 private:
  int channels_ = 0;

 public:
  static constexpr int kWidth = 3;
  static constexpr int kStages = 4;  // matmul stages
  static constexpr int kMatsPerCh = 24;
  static constexpr int kBiasPerCh = 10;
  static constexpr int kFactorPerCh = 9;
  static constexpr double kTailMass = 1e-9;
  static constexpr double kInitScale = 10.0;

  FactorizedPrior() = default;
  explicit FactorizedPrior(int channels)
      : channels_(channels),
        mats(static_cast<size_t>(channels) * kMatsPerCh, T(0)),
        biases(static_cast<size_t>(channels) * kBiasPerCh, T(0)),
        factors(static_cast<size_t>(channels) * kFactorPerCh, T(0)),
        quantiles(static_cast<size_t>(channels) * 3, T(0)) {}

  int channels() const { return channels_; }

  void init_params(Rng& rng) {
    const double init = std::log(std::expm1(
        1.0 / std::pow(kInitScale, 1.0 / kStages)));
    for (auto& m : mats) m = static_cast<T>(init);
    for (auto& b : biases) b = static_cast<T>(rng.uniform(-0.5, 0.5));
    std::fill(factors.begin(), factors.end(), T(0));
    for (int c = 0; c < channels_; ++c) {
      quantiles[c * 3 + 0] = static_cast<T>(-kInitScale);
      quantiles[c * 3 + 1] = T(0);
      quantiles[c * 3 + 2] = static_cast<T>(kInitScale);
    }
  }

  // Stage widths: 1 -> 3 -> 3 -> 3 -> 1.
  static constexpr int stage_in(int k) { return k == 0 ? 1 : kWidth; }
  static constexpr int stage_out(int k) { return k == kStages - 1 ? 1 : kWidth; }
  static constexpr int mat_offset(int k) {
    return k == 0 ? 0 : (k == 1 ? 3 : (k == 2 ? 12 : 21));
  }
  static constexpr int bias_offset(int k) { return 3 * k; }
  static constexpr int factor_offset(int k) { return 3 * k; }

  struct EvalTrace {
    double h[kStages][kWidth];   // stage inputs
    double u[kStages][kWidth];   // affine outputs
    double logit;
  };

  double eval_logit(int ch, double x, EvalTrace* tr = nullptr) const {
    const T* m = mats.data() + static_cast<size_t>(ch) * kMatsPerCh;
    const T* b = biases.data() + static_cast<size_t>(ch) * kBiasPerCh;
    const T* a = factors.data() + static_cast<size_t>(ch) * kFactorPerCh;
    double h[kWidth] = {x, 0, 0};
    double u[kWidth];
    for (int k = 0; k < kStages; ++k) {
      const int win = stage_in(k), wout = stage_out(k);
      const T* mk = m + mat_offset(k);
      const T* bk = b + bias_offset(k);
      for (int i = 0; i < wout; ++i) {
        double acc = static_cast<double>(bk[i]);
        for (int j = 0; j < win; ++j) {
          acc += softplus(static_cast<double>(mk[i * win + j])) * h[j];
        }
        u[i] = acc;
      }
      if (tr) {
        for (int j = 0; j < win; ++j) tr->h[k][j] = h[j];
        for (int i = 0; i < wout; ++i) tr->u[k][i] = u[i];
      }
      if (k < kStages - 1) {
        const T* ak = a + factor_offset(k);
        for (int i = 0; i < wout; ++i) {
          h[i] = u[i] + std::tanh(static_cast<double>(ak[i])) * std::tanh(u[i]);
        }
      }
    }
    if (tr) tr->logit = u[0];
    return u[0];
  }

  // d logit / d x, forward-mode; used by the aux objective.
  double eval_logit_dx(int ch, double x, double* logit_out = nullptr) const {
    const T* m = mats.data() + static_cast<size_t>(ch) * kMatsPerCh;
    const T* b = biases.data() + static_cast<size_t>(ch) * kBiasPerCh;
    const T* a = factors.data() + static_cast<size_t>(ch) * kFactorPerCh;
    double h[kWidth] = {x, 0, 0};
    double dh[kWidth] = {1, 0, 0};
    double u[kWidth], du[kWidth];
    for (int k = 0; k < kStages; ++k) {
      const int win = stage_in(k), wout = stage_out(k);
      const T* mk = m + mat_offset(k);
      const T* bk = b + bias_offset(k);
      for (int i = 0; i < wout; ++i) {
        double acc = static_cast<double>(bk[i]), dacc = 0.0;
        for (int j = 0; j < win; ++j) {
          const double s = softplus(static_cast<double>(mk[i * win + j]));
          acc += s * h[j];
          dacc += s * dh[j];
        }
        u[i] = acc;
        du[i] = dacc;
      }
      if (k < kStages - 1) {
        const T* ak = a + factor_offset(k);
        for (int i = 0; i < wout; ++i) {
          const double th = std::tanh(u[i]);
          const double ta = std::tanh(static_cast<double>(ak[i]));
          h[i] = u[i] + ta * th;
          dh[i] = du[i] * (1.0 + ta * (1.0 - th * th));
        }
      }
    }
    if (logit_out) *logit_out = u[0];
    return du[0];
  }

  // Reverse-mode: given d loss / d logit for one evaluation, accumulate
  // parameter gradients and return d loss / d x.
  double backward_eval(int ch, const EvalTrace& tr, double glogit,
                       FactorizedPrior<T>& grad) const {
    const T* m = mats.data() + static_cast<size_t>(ch) * kMatsPerCh;
    const T* a = factors.data() + static_cast<size_t>(ch) * kFactorPerCh;
    T* gm = grad.mats.data() + static_cast<size_t>(ch) * kMatsPerCh;
    T* gb = grad.biases.data() + static_cast<size_t>(ch) * kBiasPerCh;
    T* ga = grad.factors.data() + static_cast<size_t>(ch) * kFactorPerCh;
    double gh[kWidth] = {0, 0, 0};
    double gu[kWidth] = {glogit, 0, 0};
    for (int k = kStages - 1; k >= 0; --k) {
      const int win = stage_in(k), wout = stage_out(k);
      const T* mk = m + mat_offset(k);
      if (k < kStages - 1) {
        // gh holds d/d h_{k+1}; map back through the gate.
        const T* ak = a + factor_offset(k);
        T* gak = ga + factor_offset(k);
        for (int i = 0; i < wout; ++i) {
          const double th = std::tanh(tr.u[k][i]);
          const double ta = std::tanh(static_cast<double>(ak[i]));
          gak[i] += static_cast<T>(gh[i] * th * (1.0 - ta * ta));
          gu[i] = gh[i] * (1.0 + ta * (1.0 - th * th));
        }
      }
      T* gmk = gm + mat_offset(k);
      T* gbk = gb + bias_offset(k);
      double gh_prev[kWidth] = {0, 0, 0};
      for (int i = 0; i < wout; ++i) {
        gbk[i] += static_cast<T>(gu[i]);
        for (int j = 0; j < win; ++j) {
          const double mv = static_cast<double>(mk[i * win + j]);
          const double s = softplus(mv);
          gmk[i * win + j] += static_cast<T>(gu[i] * tr.h[k][j] * sigmoid(mv));
          gh_prev[j] += s * gu[i];
        }
      }
      for (int j = 0; j < kWidth; ++j) gh[j] = gh_prev[j];
    }
    return gh[0];
  }

  // Bin mass CDF(x+1/2) - CDF(x-1/2), floored. The sign flip evaluates the
  // difference on the smaller sigmoid branch to avoid cancellation in tails.
  double bin_mass_raw(int ch, double x) const {
    const double up = eval_logit(ch, x + 0.5);
    const double lo = eval_logit(ch, x - 0.5);
    const double sign = (up + lo < 0.0) ? 1.0 : -1.0;
    return std::abs(sigmoid(sign * up) - sigmoid(sign * lo));
  }

  T bin_mass(int ch, T x) const {
    return static_cast<T>(
        std::max(bin_mass_raw(ch, static_cast<double>(x)), kLikelihoodFloor));
  }

  // p[c, y, x] = floored bin mass of z[c, y, x] under channel c's density.
  Tensor<T> bin_likelihood(const Tensor<T>& z) const {
    if (z.channels() != channels_) {
      throw std::invalid_argument("FactorizedPrior: channel mismatch " +
                                  z.shape_str());
    }
    Tensor<T> p(z.channels(), z.height(), z.width());
    for (int c = 0; c < channels_; ++c) {
      const T* zc = z.channel(c);
      T* pc = p.channel(c);
      for (int i = 0; i < z.plane(); ++i) pc[i] = bin_mass(c, zc[i]);
    }
    return p;
  }

  // Accumulates d loss / d params into grad and writes d loss / d z.
  void bin_likelihood_backward(const Tensor<T>& z, const Tensor<T>& p,
                               const Tensor<T>& gp, FactorizedPrior<T>& grad,
                               Tensor<T>& gz) const {
    for (int c = 0; c < channels_; ++c) {
      const T* zc = z.channel(c);
      const T* pc = p.channel(c);
      const T* gpc = gp.channel(c);
      T* gzc = gz.channel(c);
      for (int i = 0; i < z.plane(); ++i) {
        if (static_cast<double>(pc[i]) <= kLikelihoodFloor || gpc[i] == T(0)) {
          gzc[i] = T(0);
          continue;
        }
        const double x = static_cast<double>(zc[i]);
        EvalTrace tu, tl;
        const double up = eval_logit(c, x + 0.5, &tu);
        const double lo = eval_logit(c, x - 0.5, &tl);
        const double sign = (up + lo < 0.0) ? 1.0 : -1.0;
        const double su = sigmoid(sign * up);
        const double sl = sigmoid(sign * lo);
        const double outer = (su - sl >= 0.0) ? 1.0 : -1.0;
        const double g = static_cast<double>(gpc[i]);
        // p = |sigmoid(sign*up) - sigmoid(sign*lo)|
        const double gup = g * outer * sign * su * (1.0 - su);
        const double glo = -g * outer * sign * sl * (1.0 - sl);
        double gx = backward_eval(c, tu, gup, grad);
        gx += backward_eval(c, tl, glo, grad);
        gzc[i] = static_cast<T>(gx);
      }
    }
  }

  double quantile(int ch, int which) const {
    return static_cast<double>(quantiles[static_cast<size_t>(ch) * 3 + which]);
  }

  // Quantile-fitting objective: drives CDF(q_lo) -> tail, CDF(q_med) -> 1/2,
  // CDF(q_hi) -> 1 - tail in logit space. Gradients flow only into the
  // quantiles; the density parameters are treated as constants here.
  double aux_loss(FactorizedPrior<T>* grad = nullptr) const {
    const double t = std::log(kTailMass / (1.0 - kTailMass));
    const double targets[3] = {t, 0.0, -t};
    double loss = 0.0;
    for (int c = 0; c < channels_; ++c) {
      for (int q = 0; q < 3; ++q) {
        double logit_v;
        const double dx =
            eval_logit_dx(c, quantile(c, q), &logit_v);
        const double diff = logit_v - targets[q];
        loss += std::abs(diff);
        if (grad) {
          const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
          grad->quantiles[static_cast<size_t>(c) * 3 + q] +=
              static_cast<T>(sgn * dx);
        }
      }
    }
    return loss;
  }

  void collect(std::vector<ParamView<T>>& out) {
    out.push_back({mats.data(), mats.size()});
    out.push_back({biases.data(), biases.size()});
    out.push_back({factors.data(), factors.size()});
    out.push_back({quantiles.data(), quantiles.size()});
  }

  std::vector<T> mats;       // [ch, 24]
  std::vector<T> biases;     // [ch, 10]
  std::vector<T> factors;    // [ch, 9]
  std::vector<T> quantiles;  // [ch, 3]
};

}  // namespace pdtd

#endif  // PDTD_FACTORIZED_HPP_
