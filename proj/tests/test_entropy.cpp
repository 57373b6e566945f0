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

#include <cmath>

#include "doctest.h"
#include "pdtd/factorized.hpp"
#include "pdtd/gaussian.hpp"
#include "pdtd/quantize.hpp"
#include "test_util.hpp"

using namespace pdtd;
using pdtd::test::check_gradient;

namespace {

// Independent oracle: Simpson quadrature of the normal density over
// [v-1/2, v+1/2]; deliberately avoids erf.
double gaussian_bin_oracle(double v, double sigma, int panels = 4096) {
  const double lo = (v - 0.5) / sigma, hi = (v + 0.5) / sigma;
  const double h = (hi - lo) / panels;
  auto density = [](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
  };
  double acc = density(lo) + density(hi);
  for (int i = 1; i < panels; ++i) {
    acc += density(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("round quantization uses half-to-even") {
  Tensor<float> v(1, 1, 4);
  v[0] = 1.4f;
  v[1] = -2.5f;
  v[2] = 0.5f;
  v[3] = 1.5f;
  auto q = quantize(v, QuantizeMode::kRound);
  CHECK(q[0] == 1.0f);
  CHECK(q[1] == -2.0f);
  CHECK(q[2] == 0.0f);
  CHECK(q[3] == 2.0f);
}

TEST_CASE("noise quantization stays within the unit bin and is seeded") {
  Rng rng(77);
  Tensor<float> v(4, 8, 8);
  for (size_t i = 0; i < v.size(); ++i) v[i] = float(rng.uniform(-10, 10));
  Rng n1(123), n2(123);
  auto q1 = quantize(v, QuantizeMode::kNoise, &n1);
  auto q2 = quantize(v, QuantizeMode::kNoise, &n2);
  for (size_t i = 0; i < v.size(); ++i) {
    const float d = q1[i] - v[i];
    CHECK(d >= -0.5f);
    CHECK(d < 0.5f);
    CHECK(q1[i] == q2[i]);  // bitwise reproducible under the same seed
  }
}

TEST_CASE("gaussian bin likelihood matches the integration oracle") {
  // spec examples first
  CHECK(gaussian_bin_mass(0.0, 1.0) == doctest::Approx(0.3829249).epsilon(1e-6));
  CHECK(gaussian_bin_mass(0.0, 100.0) == doctest::Approx(0.0039893).epsilon(1e-4));

  for (double sigma : {0.11, 0.5, 1.0, 10.0, 100.0}) {
    for (int v = -8; v <= 8; ++v) {
      const double want = std::max(gaussian_bin_oracle(v, sigma), kLikelihoodFloor);
      const double got = gaussian_bin_mass(double(v), sigma);
      CHECK(std::abs(got - want) < 1e-6);
    }
  }
}

TEST_CASE("gaussian bin likelihood is symmetric and floored") {
  for (int k = 0; k <= 12; ++k) {
    CHECK(gaussian_bin_mass(double(k), 2.5) ==
          doctest::Approx(gaussian_bin_mass(-double(k), 2.5)).epsilon(1e-15));
  }
  CHECK(gaussian_bin_mass(500.0, 0.11) == kLikelihoodFloor);
}

TEST_CASE("gaussian likelihood gradients match finite differences") {
  Rng rng(9);
  const int n = 24;
  Tensor<double> y(1, 1, n), sigma(1, 1, n);
  for (int i = 0; i < n; ++i) {
    y[i] = rng.uniform(-3, 3);
    sigma[i] = rng.uniform(0.2, 5.0);
  }
  std::vector<double> w(n);
  for (auto& v : w) v = rng.uniform(-1, 1);

  auto eval = [&] {
    auto p = gaussian_bin_likelihood(y, sigma);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += w[i] * p[i];
    return s;
  };

  auto p = gaussian_bin_likelihood(y, sigma);
  Tensor<double> gp(1, 1, n), gy(1, 1, n), gs(1, 1, n);
  for (int i = 0; i < n; ++i) gp[i] = w[i];
  gaussian_bin_likelihood_backward(y, sigma, p, gp, gy, gs);

  auto r1 = check_gradient(eval, y.data(), gy.data(), n, rng);
  CHECK(r1.max_rel_err < 1e-3);
  auto r2 = check_gradient(eval, sigma.data(), gs.data(), n, rng);
  CHECK(r2.max_rel_err < 1e-3);
}

TEST_CASE("scale table spans the sigma range with nearest-upper lookup") {
  auto t = make_scale_table();
  CHECK(t.size() == kScaleTableSize);
  CHECK(t.front() == kSigmaMin);
  CHECK(t.back() == kSigmaTableMax);
  for (size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
  CHECK(scale_index(kSigmaMin, t) == 0);
  CHECK(scale_index(1000.0, t) == kScaleTableSize - 1);
  for (double s : {0.12, 0.7, 3.0, 90.0}) {
    const int idx = scale_index(s, t);
    CHECK(t[idx] >= s);
    if (idx > 0) CHECK(t[idx - 1] < s);
  }
}

TEST_CASE("factorized prior is a proper CDF") {
  Rng rng(4);
  FactorizedPrior<double> prior(3);
  prior.init_params(rng);

  for (int c = 0; c < 3; ++c) {
    double prev = -1e100;
    for (double x = -30.0; x <= 30.0; x += 0.25) {
      const double l = prior.eval_logit(c, x);
      CHECK(l >= prev);  // monotone
      prev = l;
    }
    CHECK(sigmoid(prior.eval_logit(c, -1e4)) < 1e-6);
    CHECK(sigmoid(prior.eval_logit(c, 1e4)) > 1.0 - 1e-6);

    // bin masses telescope to at most 1
    double total = 0.0;
    for (int v = -64; v <= 64; ++v) total += prior.bin_mass_raw(c, double(v));
    CHECK(total <= 1.0 + 1e-6);
    CHECK(total > 0.0);
  }
}

TEST_CASE("factorized prior gradients match finite differences") {
  Rng rng(14);
  FactorizedPrior<double> prior(2);
  prior.init_params(rng);
  const int n = 10;
  Tensor<double> z(2, 1, n / 2);
  for (size_t i = 0; i < z.size(); ++i) z[i] = rng.uniform(-4, 4);
  std::vector<double> w(z.size());
  for (auto& v : w) v = rng.uniform(-1, 1);

  auto eval = [&] {
    auto p = prior.bin_likelihood(z);
    double s = 0.0;
    for (size_t i = 0; i < p.size(); ++i) s += w[i] * p[i];
    return s;
  };

  auto p = prior.bin_likelihood(z);
  Tensor<double> gp(2, 1, n / 2), gz(2, 1, n / 2);
  for (size_t i = 0; i < p.size(); ++i) gp[i] = w[i];
  FactorizedPrior<double> grad(2);
  std::fill(grad.mats.begin(), grad.mats.end(), 0.0);
  std::fill(grad.biases.begin(), grad.biases.end(), 0.0);
  std::fill(grad.factors.begin(), grad.factors.end(), 0.0);
  prior.bin_likelihood_backward(z, p, gp, grad, gz);

  auto r1 = check_gradient(eval, z.data(), gz.data(), z.size(), rng);
  CHECK(r1.max_rel_err < 1e-3);
  auto r2 = check_gradient(eval, prior.mats.data(), grad.mats.data(),
                           prior.mats.size(), rng);
  CHECK(r2.max_rel_err < 1e-3);
  auto r3 = check_gradient(eval, prior.biases.data(), grad.biases.data(),
                           prior.biases.size(), rng);
  CHECK(r3.max_rel_err < 1e-3);
  auto r4 = check_gradient(eval, prior.factors.data(), grad.factors.data(),
                           prior.factors.size(), rng);
  CHECK(r4.max_rel_err < 1e-3);
}

TEST_CASE("aux quantile loss pulls quantiles toward the tails") {
  Rng rng(15);
  FactorizedPrior<double> prior(2);
  prior.init_params(rng);

  FactorizedPrior<double> grad(2);
  std::fill(grad.quantiles.begin(), grad.quantiles.end(), 0.0);
  const double loss = prior.aux_loss(&grad);
  CHECK(loss > 0.0);

  // finite differences on the quantiles themselves
  auto eval = [&] { return prior.aux_loss(); };
  auto r = check_gradient(eval, prior.quantiles.data(), grad.quantiles.data(),
                          prior.quantiles.size(), rng);
  CHECK(r.max_rel_err < 1e-3);

  // a few hundred descent steps should drive the objective down
  FactorizedPrior<double> g2(2);
  for (int it = 0; it < 400; ++it) {
    std::fill(g2.quantiles.begin(), g2.quantiles.end(), 0.0);
    prior.aux_loss(&g2);
    for (size_t i = 0; i < prior.quantiles.size(); ++i) {
      prior.quantiles[i] -= 0.05 * g2.quantiles[i];
    }
  }
  CHECK(prior.aux_loss() < loss);
}
