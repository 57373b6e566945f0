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

#include "pdtd/transforms.hpp"

#include <filesystem>

#include "doctest.h"
#include "fixture_io.hpp"
#include "pdtd/model.hpp"
#include "test_util.hpp"

using namespace pdtd;
using pdtd::test::check_gradient;
using pdtd::test::random_tensor;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.c_lat = 4;
  cfg.c_hp = 4;
  cfg.base_width = 4;
  cfg.group_size = 2;
  return cfg;
}

template <typename T>
Tensor<T> to_t(const Tensor<double>& d) {
  Tensor<T> t(d.channels(), d.height(), d.width());
  for (size_t i = 0; i < d.size(); ++i) t[i] = static_cast<T>(d[i]);
  return t;
}

}  // namespace

TEST_CASE("analysis: zero input with fresh params gives a zero latent") {
  HyperpriorModel<float> model(tiny_config());
  model.init_params(1);  // conv biases start at zero
  Scratch<float> s;
  Tensor<float> x(3, 64, 64);
  auto y = model.ga.forward(x, s);
  CHECK(y.channels() == 4);
  CHECK(y.height() == 4);
  CHECK(y.width() == 4);
  for (size_t i = 0; i < y.size(); ++i) CHECK(y[i] == 0.0f);
}

TEST_CASE("shape algebra across the four transforms") {
  ModelConfig cfg = tiny_config();
  HyperpriorModel<float> model(cfg);
  model.init_params(2);
  Scratch<float> s;
  Tensor<float> x(3, 128, 64);
  auto y = model.ga.forward(x, s);
  CHECK(y.height() == 8);
  CHECK(y.width() == 4);
  auto z = model.ha.forward(y, s);
  CHECK(z.channels() == cfg.c_hp);
  CHECK(z.height() == 2);
  CHECK(z.width() == 1);
  auto sigma = model.hs.forward(z, s);
  CHECK(sigma.channels() == cfg.c_lat);
  CHECK(sigma.height() == y.height());
  CHECK(sigma.width() == y.width());
  auto xh = model.gs.forward(y, s);
  CHECK(xh.channels() == 3);
  CHECK(xh.height() == x.height());
  CHECK(xh.width() == x.width());
}

TEST_CASE("analysis rejects non-divisible inputs") {
  HyperpriorModel<float> model(tiny_config());
  model.init_params(3);
  Scratch<float> s;
  Tensor<float> x(3, 96, 96);  // divisible by 32 but not 64
  CHECK_THROWS_AS(model.ga.forward(x, s), std::invalid_argument);
}

TEST_CASE("synthesis of a zero latent with fresh params is zero") {
  HyperpriorModel<float> model(tiny_config());
  model.init_params(4);
  Scratch<float> s;
  Tensor<float> y(4, 4, 4);
  auto x = model.gs.forward(y, s);
  CHECK(x.channels() == 3);
  CHECK(x.height() == 64);
  for (size_t i = 0; i < x.size(); ++i) CHECK(x[i] == 0.0f);
}

TEST_CASE("hyper analysis sees absolute values: h_a(y) == h_a(-y)") {
  HyperpriorModel<float> model(tiny_config());
  model.init_params(5);
  Scratch<float> s;
  Rng rng(50);
  Tensor<float> y(4, 8, 8), neg(4, 8, 8);
  for (size_t i = 0; i < y.size(); ++i) {
    y[i] = static_cast<float>(rng.uniform(-2, 2));
    neg[i] = -y[i];
  }
  auto z1 = model.ha.forward(y, s);
  auto z2 = model.ha.forward(neg, s);
  for (size_t i = 0; i < z1.size(); ++i) CHECK(z1[i] == z2[i]);
}

TEST_CASE("hyper synthesis respects the sigma floor") {
  HyperpriorModel<float> model(tiny_config());
  model.init_params(6);
  Scratch<float> s;
  Rng rng(60);
  Tensor<float> z(4, 4, 4);
  for (size_t i = 0; i < z.size(); ++i) z[i] = static_cast<float>(rng.uniform(-30, 30));
  auto sigma = model.hs.forward(z, s);
  for (size_t i = 0; i < sigma.size(); ++i) CHECK(sigma[i] >= float(kSigmaMin));
}

TEST_CASE("forward passes are deterministic") {
  HyperpriorModel<float> model(tiny_config());
  model.init_params(7);
  Scratch<float> s1, s2;
  Rng rng(70);
  Tensor<float> x(3, 64, 64);
  for (size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(rng.uniform(0, 1));
  auto y1 = model.ga.forward(x, s1);
  auto y2 = model.ga.forward(x, s2);
  for (size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
}

TEST_CASE("transform gradients match finite differences") {
  ModelConfig cfg = tiny_config();
  HyperpriorModel<double> model(cfg);
  model.init_params(8);
  HyperpriorModel<double> grads(cfg);
  Scratch<double> s;
  Rng rng(80);

  SUBCASE("analysis") {
    Tensor<double> x = random_tensor(3, 64, 64, rng, 0.0, 1.0);
    std::vector<double> w(size_t(4) * 4 * 4);
    for (auto& v : w) v = rng.uniform(-1, 1);
    auto eval = [&] {
      auto y = model.ga.forward(x, s);
      double acc = 0.0;
      for (size_t i = 0; i < y.size(); ++i) acc += w[i] * y[i];
      return acc;
    };
    AnalysisTransform<double>::Trace tr;
    auto y = model.ga.forward(x, s, &tr);
    Tensor<double> gy(4, 4, 4);
    for (size_t i = 0; i < gy.size(); ++i) gy[i] = w[i];
    grads.zero_params();
    model.ga.backward(tr, gy, grads.ga, s);

    auto views = model.params();
    auto gviews = grads.params();
    // ga owns the first 14 parameter views (4 convs + 3 gdns, two each)
    for (int v = 0; v < 14; ++v) {
      auto r = check_gradient(eval, views[v].data, gviews[v].data,
                              views[v].size, rng, 40);
      CHECK(r.max_rel_err < 1e-3);
    }
  }

  SUBCASE("synthesis") {
    Tensor<double> y = random_tensor(4, 4, 4, rng);
    Tensor<double> gx(3, 64, 64);
    std::vector<double> w(gx.size());
    for (auto& v : w) v = rng.uniform(-1, 1);
    for (size_t i = 0; i < gx.size(); ++i) gx[i] = w[i];
    auto eval = [&] {
      auto xh = model.gs.forward(y, s);
      double acc = 0.0;
      for (size_t i = 0; i < xh.size(); ++i) acc += w[i] * xh[i];
      return acc;
    };
    SynthesisTransform<double>::Trace tr;
    model.gs.forward(y, s, &tr);
    grads.zero_params();
    Tensor<double> gin = model.gs.backward(tr, gx, grads.gs, s);
    auto r0 = check_gradient(eval, y.data(), gin.data(), y.size(), rng, 40);
    CHECK(r0.max_rel_err < 1e-3);
    auto views = model.params();
    auto gviews = grads.params();
    for (int v = 14; v < 28; ++v) {  // gs views
      auto r = check_gradient(eval, views[v].data, gviews[v].data,
                              views[v].size, rng, 40);
      CHECK(r.max_rel_err < 1e-3);
    }
  }

  SUBCASE("hyper pair") {
    Tensor<double> y = random_tensor(4, 8, 8, rng);
    std::vector<double> w(size_t(4) * 8 * 8);
    for (auto& v : w) v = rng.uniform(-1, 1);
    auto eval = [&] {
      auto z = model.ha.forward(y, s);
      auto sigma = model.hs.forward(z, s);
      double acc = 0.0;
      for (size_t i = 0; i < sigma.size(); ++i) acc += w[i] * sigma[i];
      return acc;
    };
    HyperAnalysisTransform<double>::Trace tr_ha;
    HyperSynthesisTransform<double>::Trace tr_hs;
    auto z = model.ha.forward(y, s, &tr_ha);
    auto sigma = model.hs.forward(z, s, &tr_hs);
    Tensor<double> gs_(sigma.channels(), sigma.height(), sigma.width());
    for (size_t i = 0; i < gs_.size(); ++i) gs_[i] = w[i];
    grads.zero_params();
    Tensor<double> gz = model.hs.backward(tr_hs, gs_, grads.hs, s);
    Tensor<double> gy = model.ha.backward(tr_ha, gz, grads.ha, s);
    auto r0 = check_gradient(eval, y.data(), gy.data(), y.size(), rng, 40);
    CHECK(r0.max_rel_err < 1e-3);
    auto views = model.params();
    auto gviews = grads.params();
    for (int v = 28; v < 40; ++v) {  // ha (6 views) + hs (6 views)
      auto r = check_gradient(eval, views[v].data, gviews[v].data,
                              views[v].size, rng, 40);
      CHECK(r.max_rel_err < 1e-3);
    }
  }
}

TEST_CASE("seed-42 golden transform fixtures") {
  const auto path = pdtd::test::test_data_dir() / "golden_transforms.bin";
  REQUIRE_MESSAGE(std::filesystem::exists(path),
                  "run gen_fixtures and commit tests/data/golden_transforms.bin");
  auto fix = pdtd::test::read_fixture(path.string());

  ModelConfig cfg;
  cfg.c_lat = 8;
  cfg.c_hp = 4;
  cfg.base_width = 8;
  cfg.group_size = 2;
  HyperpriorModel<float> model(cfg);
  model.init_params(42);
  Scratch<float> s;

  Rng rng(42);
  Tensor<float> x(3, 64, 64);
  for (size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(rng.next_double());

  auto y = model.ga.forward(x, s);
  auto z = model.ha.forward(y, s);
  auto sigma = model.hs.forward(z, s);
  auto xh = model.gs.forward(y, s);

  auto check_against = [&](const char* name, const Tensor<float>& got) {
    const auto& want = fix.at(name);
    REQUIRE(want.size() == got.size());
    for (size_t i = 0; i < want.size(); ++i) {
      REQUIRE(std::abs(want[i] - got[i]) <= 1e-5f);
    }
  };
  check_against("y", y);
  check_against("z", z);
  check_against("sigma", sigma);
  check_against("x_hat", xh);
}
