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

#ifndef PDTD_CONFIG_HPP_
#define PDTD_CONFIG_HPP_

#include <stdexcept>
#include <string>

namespace pdtd {

struct ModelConfig {
  int c_lat = 64;       // latent channels
  int c_hp = 32;        // hyperlatent channels
  int base_width = 64;  // internal conv width
  int group_size = 8;   // progressive-unit granularity (y channels per unit)
  double u1 = 0.0;      // keep-fraction range of U(u1, u2)
  double u2 = 1.0;
  double lambda = 0.01;  // rate-distortion weight

  // Fixed by the transform architecture: four stride-2 stages in the main
  // pair, two more in the hyper pair.
  static constexpr int kDownLat = 16;
  static constexpr int kDownHp = 4;
  static constexpr int kDownTotal = kDownLat * kDownHp;

  void validate() const {
    if (c_lat <= 0 || c_hp <= 0 || base_width <= 0) {
      throw std::invalid_argument("ModelConfig: channel counts must be positive");
    }
    if (group_size <= 0 || c_lat < group_size || c_hp < group_size) {
      throw std::invalid_argument(
          "ModelConfig: group_size must be in [1, min(c_lat, c_hp)]");
    }
    // u1 == u2 is admitted: it is the standard no-drop baseline.
    if (!(0.0 <= u1 && u1 <= u2 && u2 <= 1.0)) {
      throw std::invalid_argument("ModelConfig: need 0 <= u1 <= u2 <= 1");
    }
    if (lambda <= 0.0) {
      throw std::invalid_argument("ModelConfig: lambda must be positive");
    }
  }

  int units(int group) const { return (c_lat + group - 1) / group; }
};

inline void check_divisible(int h, int w, const char* who) {
  if (h % ModelConfig::kDownTotal != 0 || w % ModelConfig::kDownTotal != 0) {
    throw std::invalid_argument(
        std::string(who) + ": image dims must be divisible by " +
        std::to_string(ModelConfig::kDownTotal) + ", got " +
        std::to_string(h) + "x" + std::to_string(w));
  }
}

}  // namespace pdtd

#endif  // PDTD_CONFIG_HPP_
