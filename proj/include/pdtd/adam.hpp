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

#ifndef PDTD_ADAM_HPP_
#define PDTD_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "pdtd/layers.hpp"

namespace pdtd {

template <typename T>
class Adam {
 public:
  Adam() = default;
  Adam(const std::vector<ParamView<T>>& params, double lr)
      : lr_(lr) {
    size_t total = 0;
    for (const auto& p : params) total += p.size;
    m_.assign(total, T(0));
    v_.assign(total, T(0));
  }

  // Scales all gradients so their global L2 norm is at most max_norm.
  static void clip_global_norm(const std::vector<ParamView<T>>& grads,
                               double max_norm) {
    double sq = 0.0;
    for (const auto& g : grads) {
      for (size_t i = 0; i < g.size; ++i) {
        sq += static_cast<double>(g.data[i]) * static_cast<double>(g.data[i]);
      }
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm || norm == 0.0) return;
    const T scale = static_cast<T>(max_norm / norm);
    for (const auto& g : grads) {
      for (size_t i = 0; i < g.size; ++i) g.data[i] *= scale;
    }
  }

  void step(const std::vector<ParamView<T>>& params,
            const std::vector<ParamView<T>>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    const double alpha = lr_ * std::sqrt(bc2) / bc1;
    size_t off = 0;
    for (size_t s = 0; s < params.size(); ++s) {
      T* p = params[s].data;
      const T* g = grads[s].data;
      for (size_t i = 0; i < params[s].size; ++i) {
        T& m = m_[off + i];
        T& v = v_[off + i];
        m = static_cast<T>(kBeta1 * m + (1.0 - kBeta1) * g[i]);
        v = static_cast<T>(kBeta2 * v + (1.0 - kBeta2) * g[i] * g[i]);
        p[i] -= static_cast<T>(alpha * m / (std::sqrt(static_cast<double>(v)) + kEps));
      }
      off += params[s].size;
    }
  }

  int64_t steps_taken() const { return t_; }
  double learning_rate() const { return lr_; }

  // Raw state, serialized with checkpoints so interrupted runs resume with
  // identical optimizer dynamics.
  std::vector<T>& moment1() { return m_; }
  std::vector<T>& moment2() { return v_; }
  void restore(int64_t t, std::vector<T> m, std::vector<T> v) {
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  double lr_ = 1e-4;
  int64_t t_ = 0;
  std::vector<T> m_, v_;
};

}  // namespace pdtd

#endif  // PDTD_ADAM_HPP_
