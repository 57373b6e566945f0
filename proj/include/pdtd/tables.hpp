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

#ifndef PDTD_TABLES_HPP_
#define PDTD_TABLES_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "pdtd/coder.hpp"
#include "pdtd/factorized.hpp"

namespace pdtd {

constexpr int kCdfPrecision = 16;  // total mass 2^16 per row

// One quantized CDF over the symbol values [min_symbol, max_symbol()] plus a
// trailing escape slot for out-of-range values (coded as escape + raw bits).
// cdf has n_symbols()+1 entries: cdf[0] = 0, strictly increasing,
// cdf[n] = 65536, so every symbol (escape included) has frequency >= 1.
struct CdfRow {
  int32_t min_symbol = 0;
  std::vector<uint32_t> cdf;

  int n_symbols() const { return static_cast<int>(cdf.size()) - 1; }
  int escape_index() const { return n_symbols() - 1; }
  int32_t max_symbol() const { return min_symbol + escape_index() - 1; }
  double bin_probability(int index) const {
    return (cdf[index + 1] - cdf[index]) / 65536.0;
  }
};

struct EntropyTables {
  std::vector<double> scale_table;   // 64 sigma grid points
  std::vector<CdfRow> gaussian;     // one row per grid point
  std::vector<CdfRow> factorized;   // one row per hyperlatent channel
};

// Largest-remainder quantization of a pmf (escape mass appended as the last
// bin) to integer counts summing 2^16 with every bin >= 1. Throws if the bin
// count itself exceeds the total mass budget.
CdfRow quantize_pmf(std::span<const double> pmf, double escape_mass,
                    int32_t min_symbol);

// Deterministic table construction from the trained prior. Gaussian rows
// cover every scale-table entry; per-channel rows cover the factorized
// density with support taken from the learned quantiles.
EntropyTables build_tables(const FactorizedPrior<float>& prior);

// Symbol layer on top of the range coder: values inside the row's support
// are coded straight off the CDF; anything else is coded as the escape
// symbol followed by a zigzagged overflow in 4-bit bypass chunks.
void encode_symbol(RangeEncoder& enc, const CdfRow& row, int32_t value);
int32_t decode_symbol(RangeDecoder& dec, const CdfRow& row);

// -log2 of the table probability the encoder will pay for `value`
// (escape raw bits included); used by rate accounting oracles.
double symbol_bits(const CdfRow& row, int32_t value);

// True when `value` needs the escape path under `row`.
bool needs_escape(const CdfRow& row, int32_t value);

}  // namespace pdtd

#endif  // PDTD_TABLES_HPP_
