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

// Procedural image dataset generator for desk-scale experiments and tests.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "pdtd/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pdtd synthetic dataset generator"};
  std::string out_dir;
  int count = 100;
  int width = 160, height = 160;
  uint64_t seed = 1;
  std::string format = "png";
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--count", count, "number of images");
  app.add_option("--width", width, "image width");
  app.add_option("--height", height, "image height");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--format", format, "png or ppm")
      ->check(CLI::IsMember({"png", "ppm"}));
  CLI11_PARSE(app, argc, argv);

  pdtd::make_synth_dataset(out_dir, count, width, height, seed, format);
  std::printf("wrote %d %dx%d images to %s\n", count, width, height,
              out_dir.c_str());
  return 0;
}
