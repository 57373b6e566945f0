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

#include "pdtd/tensor.hpp"

#include "doctest.h"
#include "pdtd/blas.hpp"
#include "pdtd/rng.hpp"

using namespace pdtd;

TEST_CASE("tensor layout is channel-major") {
  Tensor<float> t(2, 3, 4);
  t.at(1, 2, 3) = 7.0f;
  CHECK(t[size_t(1) * 12 + 2 * 4 + 3] == 7.0f);
  CHECK(t.channel(1)[11] == 7.0f);
  CHECK(t.plane() == 12);
}

TEST_CASE("gemm matches a naive product") {
  Rng rng(7);
  const int m = 5, n = 4, k = 3;
  std::vector<double> a(m * k), b(k * n), c(m * n, 0.0), ref(m * n, 0.0);
  for (auto& v : a) v = rng.uniform(-1, 1);
  for (auto& v : b) v = rng.uniform(-1, 1);
  gemm(false, false, m, n, k, 1.0, a.data(), k, b.data(), n, 0.0, c.data(), n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < k; ++l) ref[i * n + j] += a[i * k + l] * b[l * n + j];
    }
  }
  for (int i = 0; i < m * n; ++i) CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("rng streams are deterministic and independent of call order") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(mix64(1, 2) != mix64(2, 1));
  Rng u(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.next_double();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}
