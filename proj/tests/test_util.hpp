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

#ifndef PDTD_TESTS_TEST_UTIL_HPP_
#define PDTD_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pdtd/rng.hpp"
#include "pdtd/tensor.hpp"

namespace pdtd::test {

inline Tensor<double> random_tensor(int c, int h, int w, Rng& rng,
                                    double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(c, h, w);
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Central finite differences of a scalar function against an analytic
// gradient, on a sampled subset of coordinates. Relative error uses
// max(|fd|, |analytic|, floor) as the scale.
//
// Coordinates whose one-sided slopes disagree are skipped: central
// differences are meaningless across a kink (relu, |.|, likelihood floor),
// while a genuinely wrong analytic gradient at a smooth point still fails
// because both one-sided slopes agree with each other there.
struct GradCheck {
  double max_rel_err = 0.0;
  int checked = 0;
  int skipped_nonsmooth = 0;
};

inline GradCheck check_gradient(std::function<double()> eval, double* x,
                                const double* analytic, size_t n,
                                Rng& rng, size_t max_coords = 200,
                                double eps = 1e-4, double floor = 1e-6) {
  GradCheck res;
  std::vector<size_t> coords;
  if (n <= max_coords) {
    for (size_t i = 0; i < n; ++i) coords.push_back(i);
  } else {
    for (size_t i = 0; i < max_coords; ++i) coords.push_back(rng.next_below(n));
  }
  const double f0 = eval();
  for (size_t i : coords) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double up = eval();
    x[i] = saved - eps;
    const double dn = eval();
    x[i] = saved;
    const double slope_up = (up - f0) / eps;
    const double slope_dn = (f0 - dn) / eps;
    // A kink with one-sided slope disagreement d produces a central-FD error
    // of ~d/2, so anything above 2x the pass tolerance must be skipped.
    // Smooth coordinates disagree only by O(eps * f''), far below this.
    const double slope_scale =
        std::max({std::abs(slope_up), std::abs(slope_dn), floor});
    if (std::abs(slope_up - slope_dn) > 2e-3 * slope_scale) {
      ++res.skipped_nonsmooth;
      continue;
    }
    const double fd = (up - dn) / (2.0 * eps);
    const double scale = std::max({std::abs(fd), std::abs(analytic[i]), floor});
    const double rel = std::abs(fd - analytic[i]) / scale;
    res.max_rel_err = std::max(res.max_rel_err, rel);
    ++res.checked;
  }
  return res;
}

inline std::filesystem::path source_dir() {
  if (const char* env = std::getenv("PDTD_SOURCE_DIR")) return env;
  return std::filesystem::current_path();
}

inline std::filesystem::path test_data_dir() {
  return source_dir() / "tests" / "data";
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pdtd_test_" + name);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace pdtd::test

#endif  // PDTD_TESTS_TEST_UTIL_HPP_
