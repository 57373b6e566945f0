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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "pdtd/image.hpp"
#include "pdtd/rng.hpp"
#include "pdtd/synth.hpp"
#include "test_util.hpp"

using namespace pdtd;

TEST_CASE("psnr: sentinel, hand value, and brute-force agreement") {
  Tensor<float> a(3, 8, 8), b(3, 8, 8);
  a.fill(0.5f);
  b.fill(0.5f);
  CHECK(std::isinf(psnr(a, b)));

  // uniform difference of 0.1 -> MSE 0.01 -> 20 dB
  b.fill(0.6f);
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-6));

  Rng rng(5);
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<float>(rng.next_double());
    b[i] = static_cast<float>(rng.next_double());
  }
  double mse = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    mse += (double(a[i]) - b[i]) * (double(a[i]) - b[i]) / a.size();
  }
  CHECK(std::abs(psnr(a, b) - (-10.0 * std::log10(mse))) < 1e-9);
}

TEST_CASE("ms_ssim basic properties") {
  const Image8 ia = synth_image(101, 192, 192);
  const Image8 ib = synth_image(102, 192, 192);
  const Tensor<float> a = image_to_tensor(ia);
  const Tensor<float> b = image_to_tensor(ib);

  CHECK(ms_ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ms_ssim(a, b) == doctest::Approx(ms_ssim(b, a)).epsilon(1e-12));
  const double v = ms_ssim(a, b);
  CHECK(v >= 0.0);
  CHECK(v < 1.0);

  Tensor<float> small(3, 160, 160);
  CHECK_THROWS_AS(ms_ssim(small, small), std::invalid_argument);
}

TEST_CASE("ms_ssim matches the committed reference fixture") {
  const auto data = pdtd::test::test_data_dir();
  const auto json_path = data / "msssim_golden.json";
  REQUIRE_MESSAGE(std::filesystem::exists(json_path),
                  "run gen_fixtures + tools/gen_msssim_fixture.py");
  std::ifstream f(json_path);
  const auto golden = nlohmann::json::parse(f);

  const Tensor<float> a =
      image_to_tensor(load_image((data / "msssim_a.ppm").string()));
  const Tensor<float> b =
      image_to_tensor(load_image((data / "msssim_b.ppm").string()));
  const Tensor<float> c =
      image_to_tensor(load_image((data / "msssim_c.ppm").string()));

  CHECK(std::abs(ms_ssim(a, b) - golden.at("a_b").get<double>()) <= 1e-6);
  CHECK(std::abs(ms_ssim(a, c) - golden.at("a_c").get<double>()) <= 1e-6);
  CHECK(std::abs(ms_ssim(b, c) - golden.at("b_c").get<double>()) <= 1e-6);
}

TEST_CASE("spearman rank correlation") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> inc = {0.1, 0.2, 0.25, 0.9, 1.4};
  std::vector<double> dec = {5, 4, 3, 2, 1};
  CHECK(spearman_rho(x, inc) == doctest::Approx(1.0));
  CHECK(spearman_rho(x, dec) == doctest::Approx(-1.0));
  std::vector<double> noisy = {0.1, 0.3, 0.2, 0.5, 0.9};
  CHECK(spearman_rho(x, noisy) == doctest::Approx(0.9));
  std::vector<double> tied = {1, 1, 2, 2, 3};
  CHECK(spearman_rho(x, tied) > 0.9);
}
