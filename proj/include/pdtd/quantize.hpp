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

#ifndef PDTD_QUANTIZE_HPP_
#define PDTD_QUANTIZE_HPP_

#include <cmath>

#include "pdtd/rng.hpp"
#include "pdtd/tensor.hpp"

namespace pdtd {

enum class QuantizeMode {
  kNoise,  // training path: adds U(-1/2, 1/2), gradient passes through
  kRound,  // inference path: round half to even
};

template <typename T>
Tensor<T> quantize(const Tensor<T>& v, QuantizeMode mode, Rng* rng = nullptr) {
  Tensor<T> out(v.channels(), v.height(), v.width());
  if (mode == QuantizeMode::kNoise) {
    for (size_t i = 0; i < v.size(); ++i) {
      out[i] = v[i] + static_cast<T>(rng->next_double() - 0.5);
    }
  } else {
    for (size_t i = 0; i < v.size(); ++i) {
      out[i] = static_cast<T>(std::nearbyint(v[i]));
    }
  }
  return out;
}

template <typename T>
void round_to_symbols(const Tensor<T>& v, std::vector<int32_t>& out) {
  out.resize(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<int32_t>(std::nearbyint(v[i]));
  }
}

}  // namespace pdtd

#endif  // PDTD_QUANTIZE_HPP_
