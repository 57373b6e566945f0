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

#include "pdtd/train_step.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pdtd/adam.hpp"
#include "pdtd/synth.hpp"
#include "pdtd/trainer.hpp"
#include "test_util.hpp"

using namespace pdtd;
using pdtd::test::check_gradient;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.c_lat = 4;
  cfg.c_hp = 4;
  cfg.base_width = 4;
  cfg.group_size = 2;
  cfg.lambda = 0.01;
  return cfg;
}

template <typename T>
std::vector<Tensor<T>> random_batch(int n, int size, uint64_t seed) {
  std::vector<Tensor<T>> batch;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    Tensor<T> x(3, size, size);
    for (size_t j = 0; j < x.size(); ++j) {
      x[j] = static_cast<T>(rng.next_double());
    }
    batch.push_back(std::move(x));
  }
  return batch;
}

}  // namespace

TEST_CASE("full RD loss gradients match finite differences") {
  ModelConfig cfg = tiny_config();
  HyperpriorModel<double> model(cfg);
  model.init_params(123);
  HyperpriorModel<double> grads(cfg);
  grads.zero_params();

  auto batch = random_batch<double>(1, 64, 9);
  const uint64_t step_seed = mix64(77, 0, 0);
  Rng rng_plan(mix64(step_seed, StepStreams::kPlan, 0));
  DropPlan plan = sample_drop_plan(rng_plan, cfg);
  // make sure the plan actually drops something for this check
  plan.keep_lat = 3;
  plan.keep_hp = 3;

  Scratch<double> s;
  auto eval = [&] {
    return dtd_image_pass<double>(model, batch[0], plan, step_seed, 0, 1.0,
                                  nullptr, s)
        .total;
  };
  dtd_image_pass<double>(model, batch[0], plan, step_seed, 0, 1.0, &grads, s);

  auto views = model.params();
  auto gviews = grads.params();
  Rng rng(31);
  for (size_t v = 0; v < views.size(); ++v) {
    if (views[v].data == model.prior.quantiles.data()) continue;  // aux-only
    auto r = check_gradient(eval, views[v].data, gviews[v].data, views[v].size,
                            rng, 12);
    CAPTURE(v);
    CHECK(r.max_rel_err < 1e-3);
  }
}

TEST_CASE("u1 = u2 = 1 reduces to standard hyperprior training") {
  ModelConfig cfg = tiny_config();
  cfg.u1 = cfg.u2 = 1.0;
  HyperpriorModel<float> model(cfg);
  model.init_params(5);
  HyperpriorModel<float> grads(cfg);
  grads.zero_params();
  auto batch = random_batch<float>(2, 64, 10);
  auto loss = train_step(model, grads, batch, mix64(1, 2, 3), 1);

  // same pipeline with masks forced to keep-all gives the identical loss
  Scratch<float> s;
  DropPlan all{1.0, cfg.c_lat, cfg.c_hp};
  double ry = 0, rz = 0, mse = 0;
  for (int i = 0; i < 2; ++i) {
    auto part = dtd_image_pass<float>(model, batch[i], all, mix64(1, 2, 3), i,
                                      0.5, nullptr, s);
    ry += 0.5 * part.rate_y_bpp;
    rz += 0.5 * part.rate_z_bpp;
    mse += 0.5 * part.distortion_mse;
  }
  CHECK(loss.rate_y_bpp == doctest::Approx(ry).epsilon(1e-12));
  CHECK(loss.rate_z_bpp == doctest::Approx(rz).epsilon(1e-12));
  CHECK(loss.distortion_mse == doctest::Approx(mse).epsilon(1e-12));
}

TEST_CASE("loss bookkeeping identity is exact") {
  ModelConfig cfg = tiny_config();
  HyperpriorModel<float> model(cfg);
  model.init_params(6);
  HyperpriorModel<float> grads(cfg);
  grads.zero_params();
  auto batch = random_batch<float>(3, 64, 11);
  auto loss = train_step(model, grads, batch, mix64(4, 5, 6), 2);
  CHECK(loss.total == loss.rate_y_bpp + loss.rate_z_bpp +
                          cfg.lambda * kDistortionScale * loss.distortion_mse);
}

TEST_CASE("masked channels receive no gradient through the masked paths") {
  // With the hyper-analysis weights zeroed, the only route into the dropped
  // y channels is through masked branches, so the g_a output rows that feed
  // them must accumulate exactly zero gradient.
  ModelConfig cfg = tiny_config();
  HyperpriorModel<double> model(cfg);
  model.init_params(7);
  std::vector<ParamView<double>> ha_views;
  model.ha.collect(ha_views);
  for (auto& v : ha_views) std::fill(v.data, v.data + v.size, 0.0);

  auto batch = random_batch<double>(1, 64, 12);
  Scratch<double> s;
  DropPlan plan{0.5, 2, 2};
  HyperpriorModel<double> grads(cfg);
  grads.zero_params();
  dtd_image_pass<double>(model, batch[0], plan, mix64(9, 9, 9), 0, 1.0, &grads,
                         s);

  // g_a parameter views: conv1 w,b, conv2 w,b, conv3 w,b, conv4 w,b, ...
  // conv4 weight (view 6) has layout [out_ch, in*k*k]; rows of dropped
  // output channels must be zero.
  auto views = grads.params();
  const auto& w = views[6];
  const size_t row = w.size / cfg.c_lat;
  REQUIRE(row == size_t(cfg.base_width) * 25);
  bool kept_nonzero = false;
  for (int oc = 0; oc < plan.keep_lat; ++oc) {
    for (size_t i = 0; i < row; ++i) {
      kept_nonzero |= w.data[oc * row + i] != 0.0;
    }
  }
  CHECK(kept_nonzero);
  for (int oc = plan.keep_lat; oc < cfg.c_lat; ++oc) {
    for (size_t i = 0; i < row; ++i) {
      REQUIRE(w.data[oc * row + i] == 0.0);
    }
  }
}

TEST_CASE("train_step is deterministic across thread counts of a fixed split") {
  ModelConfig cfg = tiny_config();
  HyperpriorModel<float> model(cfg);
  model.init_params(8);
  auto batch = random_batch<float>(4, 64, 13);
  HyperpriorModel<float> g1(cfg), g2(cfg);
  g1.zero_params();
  g2.zero_params();
  auto l1 = train_step(model, g1, batch, mix64(1, 1, 1), 2);
  auto l2 = train_step(model, g2, batch, mix64(1, 1, 1), 2);
  CHECK(l1.total == l2.total);
  auto v1 = g1.params(), v2 = g2.params();
  for (size_t v = 0; v < v1.size(); ++v) {
    for (size_t i = 0; i < v1[v].size; ++i) {
      REQUIRE(v1[v].data[i] == v2[v].data[i]);
    }
  }
}

TEST_CASE("resume from checkpoint continues bit-identically") {
  namespace fs = std::filesystem;
  auto work = pdtd::test::temp_dir("resume");
  fs::remove_all(work);
  make_synth_dataset((work / "data").string(), 16, 64, 64, 31, "ppm");

  TrainConfig tc;
  tc.model.c_lat = 8;
  tc.model.c_hp = 4;
  tc.model.base_width = 8;
  tc.model.group_size = 2;
  tc.batch = 4;
  tc.patch = 64;
  tc.seed = 13;
  tc.data_dir = (work / "data").string();
  tc.log_every = 0;

  // uninterrupted: two epochs in one call
  tc.out_dir = (work / "straight").string();
  tc.epochs = 2;
  train(tc);

  // interrupted: one epoch, then resume to two
  tc.out_dir = (work / "resumed").string();
  tc.epochs = 1;
  train(tc);
  tc.epochs = 2;
  train(tc);

  auto bytes = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f),
                       std::istreambuf_iterator<char>());
  };
  REQUIRE(bytes(work / "straight" / "checkpoint.pdtdc") ==
          bytes(work / "resumed" / "checkpoint.pdtdc"));

  // per-step losses of the second epoch agree row for row
  auto tail_rows = [&](const fs::path& p) {
    std::ifstream f(p);
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(f, line)) rows.push_back(line);
    return std::vector<std::string>(rows.end() - 4, rows.end());
  };
  CHECK(tail_rows(work / "straight" / "metrics.csv") ==
        tail_rows(work / "resumed" / "metrics.csv"));
}

TEST_CASE("all latent channels accumulate gradient when u1 < 1") {
  // Tail channels are dropped often but not always; over enough steps every
  // g_a output row must have received some gradient.
  ModelConfig cfg = tiny_config();
  cfg.u1 = 0.0;
  cfg.u2 = 1.0;
  HyperpriorModel<float> model(cfg);
  model.init_params(17);
  // zero h_a so the only path into dropped channels is the kept-step one
  std::vector<ParamView<float>> ha_views;
  model.ha.collect(ha_views);
  for (auto& v : ha_views) std::fill(v.data, v.data + v.size, 0.0f);

  std::vector<double> accum(cfg.c_lat, 0.0);
  HyperpriorModel<float> grads(cfg);
  for (int step = 0; step < 30; ++step) {
    auto batch = random_batch<float>(2, 64, 400 + step);
    grads.zero_params();
    train_step(model, grads, batch, mix64(17, 0, step), 1);
    auto views = grads.params();
    const auto& w = views[6];  // g_a conv4 weight [c_lat rows]
    const size_t row = w.size / cfg.c_lat;
    for (int c = 0; c < cfg.c_lat; ++c) {
      for (size_t i = 0; i < row; ++i) {
        accum[c] += std::abs(double(w.data[c * row + i]));
      }
    }
  }
  for (int c = 0; c < cfg.c_lat; ++c) {
    CAPTURE(c);
    CHECK(accum[c] > 0.0);
  }
}

TEST_CASE("loss stays finite over 100 steps at toy scale") {
  ModelConfig cfg = tiny_config();
  HyperpriorModel<float> model(cfg);
  model.init_params(99);
  HyperpriorModel<float> grads(cfg);
  auto params = model.params();
  auto gviews = grads.params();
  Adam<float> adam(params, 1e-4);
  double first_avg = 0.0, last_avg = 0.0;
  for (int step = 0; step < 100; ++step) {
    auto batch = random_batch<float>(2, 64, 1000 + step);
    grads.zero_params();
    auto loss = train_step(model, grads, batch, mix64(99, 0, step), 2);
    model.prior.aux_loss(&grads.prior);
    Adam<float>::clip_global_norm(gviews, 1.0);
    adam.step(params, gviews);
    model.project();
    REQUIRE(std::isfinite(loss.total));
    if (step < 10) first_avg += loss.total / 10;
    if (step >= 90) last_avg += loss.total / 10;
  }
  CHECK(last_avg < first_avg);  // it should at least start learning
}
