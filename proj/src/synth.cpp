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

#include "pdtd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "pdtd/rng.hpp"

namespace pdtd {

namespace {

struct Rgb {
  double r, g, b;
};

Rgb random_color(Rng& rng) {
  return {rng.next_double(), rng.next_double(), rng.next_double()};
}

// Bilinearly interpolated lattice noise in [0,1].
class ValueNoise {
 public:
  ValueNoise(Rng& rng, int cells_x, int cells_y)
      : cx_(cells_x), cy_(cells_y), lattice_((cells_x + 1) * (cells_y + 1)) {
    for (auto& v : lattice_) v = rng.next_double();
  }

  double at(double u, double v) const {  // u, v in [0,1]
    const double x = u * cx_, y = v * cy_;
    const int x0 = std::min(static_cast<int>(x), cx_ - 1);
    const int y0 = std::min(static_cast<int>(y), cy_ - 1);
    const double fx = smooth(x - x0), fy = smooth(y - y0);
    const double a = lat(x0, y0), b = lat(x0 + 1, y0);
    const double c = lat(x0, y0 + 1), d = lat(x0 + 1, y0 + 1);
    return (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy;
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
  double lat(int x, int y) const { return lattice_[y * (cx_ + 1) + x]; }
  int cx_, cy_;
  std::vector<double> lattice_;
};

}  // namespace

Image8 synth_image(uint64_t seed, int width, int height) {
  Rng rng(mix64(seed, 0x73796e7468ULL));
  std::vector<double> plane(static_cast<size_t>(width) * height * 3);

  // Background: linear gradient between two colors at a random angle.
  const Rgb c0 = random_color(rng), c1 = random_color(rng);
  const double angle = rng.uniform(0, 2 * M_PI);
  const double gx = std::cos(angle), gy = std::sin(angle);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t =
          0.5 + 0.5 * (gx * (2.0 * x / width - 1) + gy * (2.0 * y / height - 1));
      double* p = &plane[(size_t(y) * width + x) * 3];
      p[0] = c0.r + (c1.r - c0.r) * t;
      p[1] = c0.g + (c1.g - c0.g) * t;
      p[2] = c0.b + (c1.b - c0.b) * t;
    }
  }

  // Two octaves of colored value noise.
  const int octaves = 2;
  for (int o = 0; o < octaves; ++o) {
    const int cells = 3 << (o + rng.next_below(2));
    ValueNoise noise(rng, cells, cells);
    const Rgb tint = random_color(rng);
    const double amp = rng.uniform(0.08, 0.35) / (o + 1);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double n =
            (noise.at(double(x) / width, double(y) / height) - 0.5) * 2.0;
        double* p = &plane[(size_t(y) * width + x) * 3];
        p[0] += amp * n * tint.r;
        p[1] += amp * n * tint.g;
        p[2] += amp * n * tint.b;
      }
    }
  }

  // A few soft-edged shapes: ellipses and rotated rectangles.
  const int shapes = 2 + static_cast<int>(rng.next_below(4));
  for (int si = 0; si < shapes; ++si) {
    const bool ellipse = rng.next_below(2) == 0;
    const Rgb col = random_color(rng);
    const double alpha = rng.uniform(0.45, 0.95);
    const double cx = rng.uniform(0.1, 0.9) * width;
    const double cy = rng.uniform(0.1, 0.9) * height;
    const double rx = rng.uniform(0.06, 0.3) * width;
    const double ry = rng.uniform(0.06, 0.3) * height;
    const double rot = rng.uniform(0, M_PI);
    const double feather = rng.uniform(0.5, 6.0);
    const double cr = std::cos(rot), sr = std::sin(rot);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = x - cx, dy = y - cy;
        const double u = (dx * cr + dy * sr) / rx;
        const double v = (-dx * sr + dy * cr) / ry;
        const double d = ellipse ? std::sqrt(u * u + v * v)
                                 : std::max(std::abs(u), std::abs(v));
        // signed distance to the unit boundary, feathered in pixels
        const double edge = (1.0 - d) * std::min(rx, ry);
        const double cov = std::clamp(edge / feather + 0.5, 0.0, 1.0);
        if (cov <= 0.0) continue;
        const double w = alpha * cov;
        double* p = &plane[(size_t(y) * width + x) * 3];
        p[0] += (col.r - p[0]) * w;
        p[1] += (col.g - p[1]) * w;
        p[2] += (col.b - p[2]) * w;
      }
    }
  }

  Image8 img;
  img.width = width;
  img.height = height;
  img.rgb.resize(plane.size());
  for (size_t i = 0; i < plane.size(); ++i) {
    img.rgb[i] =
        static_cast<uint8_t>(std::lround(std::clamp(plane[i], 0.0, 1.0) * 255.0));
  }
  return img;
}

void make_synth_dataset(const std::string& dir, int count, int width,
                        int height, uint64_t seed, const std::string& format) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "img_%05d.%s", i, format.c_str());
    const Image8 img = synth_image(mix64(seed, i), width, height);
    save_image((std::filesystem::path(dir) / name).string(), img);
  }
}

}  // namespace pdtd
