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

// Regenerates the committed golden fixtures under tests/data/. The
// transform fixture freezes the forward pass of a seed-42 model; tests
// compare against it to catch unintended numeric drift.

#include <cstdio>
#include <string>

#include "../tests/fixture_io.hpp"
#include "pdtd/model.hpp"
#include "pdtd/synth.hpp"

using namespace pdtd;

namespace {

Image8 box_blur3(const Image8& img) {
  Image8 out = img;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        int acc = 0, n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= img.height || xx < 0 || xx >= img.width) continue;
            acc += img.pixel(yy, xx)[c];
            ++n;
          }
        }
        out.pixel(y, x)[c] = static_cast<uint8_t>((acc + n / 2) / n);
      }
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string out_dir = "tests/data";
  if (argc > 1) out_dir = argv[1];

  // Metric fixture images: a reference, a blurred copy (high similarity),
  // and an unrelated image (low similarity). The companion script
  // tools/gen_msssim_fixture.py computes the reference MS-SSIM values.
  const Image8 a = synth_image(2024, 192, 192);
  const Image8 b = box_blur3(a);
  const Image8 c = synth_image(2025, 192, 192);
  save_ppm(out_dir + "/msssim_a.ppm", a);
  save_ppm(out_dir + "/msssim_b.ppm", b);
  save_ppm(out_dir + "/msssim_c.ppm", c);
  std::printf("wrote %s/msssim_{a,b,c}.ppm\n", out_dir.c_str());

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
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<float>(rng.next_double());
  }

  auto y = model.ga.forward(x, s);
  auto z = model.ha.forward(y, s);
  auto sigma = model.hs.forward(z, s);
  auto xh = model.gs.forward(y, s);

  pdtd::test::FixtureMap fix;
  auto put = [&](const char* name, const Tensor<float>& t) {
    fix[name] = std::vector<float>(t.data(), t.data() + t.size());
  };
  put("y", y);
  put("z", z);
  put("sigma", sigma);
  put("x_hat", xh);
  const std::string path = out_dir + "/golden_transforms.bin";
  pdtd::test::write_fixture(path, fix);
  std::printf("wrote %s (%zu arrays)\n", path.c_str(), fix.size());
  return 0;
}
