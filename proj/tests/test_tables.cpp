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

#include "pdtd/tables.hpp"

#include <cmath>

#include "doctest.h"
#include "pdtd/gaussian.hpp"
#include "test_util.hpp"

using namespace pdtd;

namespace {

FactorizedPrior<float> trained_ish_prior(int channels, uint64_t seed) {
  Rng rng(seed);
  FactorizedPrior<float> prior(channels);
  prior.init_params(rng);
  // settle the quantiles onto the density so table support is sane
  FactorizedPrior<float> grad(channels);
  for (int it = 0; it < 500; ++it) {
    std::fill(grad.quantiles.begin(), grad.quantiles.end(), 0.0f);
    prior.aux_loss(&grad);
    for (size_t i = 0; i < prior.quantiles.size(); ++i) {
      prior.quantiles[i] -= 0.05f * grad.quantiles[i];
    }
  }
  return prior;
}

void check_row_invariants(const CdfRow& row) {
  REQUIRE(row.cdf.size() >= 3);  // at least one value symbol + escape
  CHECK(row.cdf.front() == 0);
  CHECK(row.cdf.back() == 65536);
  for (size_t i = 1; i < row.cdf.size(); ++i) {
    REQUIRE(row.cdf[i] > row.cdf[i - 1]);  // every symbol has mass >= 1
  }
}

}  // namespace

TEST_CASE("crc is not needed here but tables are deterministic") {
  auto prior = trained_ish_prior(4, 7);
  EntropyTables a = build_tables(prior);
  EntropyTables b = build_tables(prior);
  REQUIRE(a.gaussian.size() == b.gaussian.size());
  for (size_t i = 0; i < a.gaussian.size(); ++i) {
    REQUIRE(a.gaussian[i].cdf == b.gaussian[i].cdf);
    REQUIRE(a.gaussian[i].min_symbol == b.gaussian[i].min_symbol);
  }
  for (size_t i = 0; i < a.factorized.size(); ++i) {
    REQUIRE(a.factorized[i].cdf == b.factorized[i].cdf);
  }
}

TEST_CASE("every row is a valid 16-bit CDF") {
  auto prior = trained_ish_prior(6, 8);
  EntropyTables t = build_tables(prior);
  CHECK(t.gaussian.size() == kScaleTableSize);
  CHECK(t.factorized.size() == 6);
  for (const auto& row : t.gaussian) check_row_invariants(row);
  for (const auto& row : t.factorized) check_row_invariants(row);
}

TEST_CASE("table probabilities track the continuous model within 2^-12") {
  auto prior = trained_ish_prior(4, 9);
  EntropyTables t = build_tables(prior);

  for (size_t s = 0; s < t.scale_table.size(); ++s) {
    const double sigma = t.scale_table[s];
    const CdfRow& row = t.gaussian[s];
    for (int idx = 0; idx < row.escape_index(); ++idx) {
      const int v = row.min_symbol + idx;
      const double cont = 0.5 * (std::erf((v + 0.5) / sigma * M_SQRT1_2) -
                                 std::erf((v - 0.5) / sigma * M_SQRT1_2));
      REQUIRE(std::abs(row.bin_probability(idx) - cont) <= 1.0 / 4096.0);
    }
  }
  for (int c = 0; c < 4; ++c) {
    const CdfRow& row = t.factorized[c];
    for (int idx = 0; idx < row.escape_index(); ++idx) {
      const int v = row.min_symbol + idx;
      REQUIRE(std::abs(row.bin_probability(idx) - prior.bin_mass_raw(c, v)) <=
              1.0 / 4096.0);
    }
  }
}

TEST_CASE("sigma 0.11 row concentrates its mass near zero") {
  EntropyTables t = build_tables(trained_ish_prior(2, 10));
  const CdfRow& row = t.gaussian[0];  // scale_table[0] == 0.11
  double mass = 0.0;
  for (int v = -1; v <= 1; ++v) {
    if (v < row.min_symbol || v > row.max_symbol()) continue;
    mass += row.bin_probability(v - row.min_symbol);
  }
  CHECK(mass >= 0.999);
}

TEST_CASE("largest scale rows stay within the 16-bit mass budget") {
  EntropyTables t = build_tables(trained_ish_prior(2, 11));
  const CdfRow& row = t.gaussian.back();  // sigma = 256
  CHECK(row.n_symbols() < 65536);
  CHECK(row.max_symbol() > 500);  // wide support for sigma 256
  check_row_invariants(row);
}

TEST_CASE("quantize_pmf rejects rows wider than the mass budget") {
  std::vector<double> pmf(70000, 1.0 / 70000);
  CHECK_THROWS_AS(quantize_pmf(pmf, 0.0, -35000), std::runtime_error);
}

TEST_CASE("symbol_bits accounts for escape overhead") {
  std::vector<double> pmf = {0.5, 0.4};
  CdfRow row = quantize_pmf(pmf, 0.1, 0);
  CHECK(symbol_bits(row, 0) == doctest::Approx(1.0).epsilon(0.01));
  // escaped value pays the escape bin plus count + chunks
  CHECK(symbol_bits(row, 100) > symbol_bits(row, 1));
  CHECK(needs_escape(row, 100));
  CHECK_FALSE(needs_escape(row, 1));
}
