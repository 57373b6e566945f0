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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pdtd/gaussian.hpp"

namespace pdtd {

namespace {

constexpr uint32_t kTotalMass = 1u << kCdfPrecision;
// Symbols whose continuous mass falls below one count are left to the escape
// path; keeps the min-1 redistribution from distorting the big bins.
constexpr double kSupportThreshold = 1.0 / kTotalMass;
constexpr int kMaxHalfSupport = 16000;

constexpr int kBypassChunkBits = 4;
constexpr uint32_t kBypassChunkMax = (1u << kBypassChunkBits) - 1;

}  // namespace

CdfRow quantize_pmf(std::span<const double> pmf, double escape_mass,
                    int32_t min_symbol) {
  const int n = static_cast<int>(pmf.size()) + 1;  // + escape bin
  if (static_cast<uint32_t>(n) > kTotalMass) {
    throw std::runtime_error("quantize_pmf: row too wide for 16-bit mass");
  }
  std::vector<double> p(pmf.begin(), pmf.end());
  p.push_back(std::max(escape_mass, 0.0));
  double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (sum <= 0.0) throw std::runtime_error("quantize_pmf: empty pmf");
  for (auto& v : p) v /= sum;

  std::vector<uint32_t> counts(n);
  std::vector<std::pair<double, int>> remainder(n);
  uint32_t assigned = 0;
  for (int i = 0; i < n; ++i) {
    const double exact = p[i] * kTotalMass;
    counts[i] = static_cast<uint32_t>(exact);
    remainder[i] = {exact - counts[i], i};
    assigned += counts[i];
  }
  // Distribute the leftover to the largest remainders (index as tiebreak).
  int leftover = static_cast<int>(kTotalMass) - static_cast<int>(assigned);
  std::sort(remainder.begin(), remainder.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  for (int i = 0; i < leftover && i < n; ++i) ++counts[remainder[i].second];
  // If rounding couldn't place everything (possible only when leftover > n),
  // give the rest to the largest bin.
  if (leftover > n) {
    counts[std::max_element(counts.begin(), counts.end()) - counts.begin()] +=
        leftover - n;
  }
  // Every bin needs at least one count; steal from the largest each time.
  for (int i = 0; i < n; ++i) {
    while (counts[i] == 0) {
      const int donor = static_cast<int>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      if (counts[donor] <= 1) {
        throw std::runtime_error("quantize_pmf: cannot give every bin a count");
      }
      --counts[donor];
      ++counts[i];
    }
  }

  CdfRow row;
  row.min_symbol = min_symbol;
  row.cdf.resize(n + 1);
  row.cdf[0] = 0;
  for (int i = 0; i < n; ++i) row.cdf[i + 1] = row.cdf[i] + counts[i];
  if (row.cdf.back() != kTotalMass) {
    throw std::runtime_error("quantize_pmf: mass mismatch");
  }
  return row;
}

namespace {

CdfRow gaussian_row(double sigma) {
  auto mass = [&](int v) {
    return 0.5 * (std::erf((v + 0.5) / sigma * M_SQRT1_2) -
                  std::erf((v - 0.5) / sigma * M_SQRT1_2));
  };
  // Unimodal: grow the support outward until the tail mass per symbol drops
  // below one count.
  int s_max = 0;
  while (s_max < kMaxHalfSupport && mass(s_max + 1) >= kSupportThreshold) {
    ++s_max;
  }
  std::vector<double> pmf(2 * s_max + 1);
  for (int v = -s_max; v <= s_max; ++v) pmf[v + s_max] = mass(v);
  const double covered = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  return quantize_pmf(pmf, std::max(1.0 - covered, 0.0), -s_max);
}

CdfRow factorized_row(const FactorizedPrior<float>& prior, int ch) {
  // Support from the learned tail quantiles, then trimmed where the
  // per-symbol mass falls below one count.
  const double lo = prior.quantile(ch, 0);
  const double hi = prior.quantile(ch, 2);
  int s_max = static_cast<int>(
      std::ceil(std::max(std::abs(lo), std::abs(hi))));
  s_max = std::clamp(s_max, 1, 4096);
  auto mass = [&](int v) { return prior.bin_mass_raw(ch, double(v)); };
  while (s_max > 1 && mass(-s_max) < kSupportThreshold &&
         mass(s_max) < kSupportThreshold) {
    --s_max;
  }
  std::vector<double> pmf(2 * s_max + 1);
  for (int v = -s_max; v <= s_max; ++v) pmf[v + s_max] = mass(v);
  const double covered = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  return quantize_pmf(pmf, std::max(1.0 - covered, 0.0), -s_max);
}

}  // namespace

EntropyTables build_tables(const FactorizedPrior<float>& prior) {
  EntropyTables t;
  t.scale_table = make_scale_table();
  t.gaussian.reserve(t.scale_table.size());
  for (double sigma : t.scale_table) t.gaussian.push_back(gaussian_row(sigma));
  t.factorized.reserve(prior.channels());
  for (int c = 0; c < prior.channels(); ++c) {
    t.factorized.push_back(factorized_row(prior, c));
  }
  return t;
}

bool needs_escape(const CdfRow& row, int32_t value) {
  return value < row.min_symbol || value > row.max_symbol();
}

namespace {

// Overflow values are zigzagged around the support edges, then sent as a
// chunk count (unary in chunk-max steps) plus that many 4-bit chunks.
uint32_t zigzag_overflow(const CdfRow& row, int32_t value) {
  if (value > row.max_symbol()) {
    return 2u * static_cast<uint32_t>(value - row.max_symbol() - 1);
  }
  return 2u * static_cast<uint32_t>(row.min_symbol - 1 - value) + 1u;
}

int32_t unzigzag_overflow(const CdfRow& row, uint32_t raw) {
  if ((raw & 1u) == 0) {
    return row.max_symbol() + 1 + static_cast<int32_t>(raw >> 1);
  }
  return row.min_symbol - 1 - static_cast<int32_t>(raw >> 1);
}

int bypass_chunks(uint32_t raw) {
  int n = 0;
  while ((raw >> (n * kBypassChunkBits)) != 0) ++n;
  return n;
}

}  // namespace

void encode_symbol(RangeEncoder& enc, const CdfRow& row, int32_t value) {
  int index;
  if (needs_escape(row, value)) {
    index = row.escape_index();
  } else {
    index = value - row.min_symbol;
  }
  enc.encode(row.cdf[index], row.cdf[index + 1] - row.cdf[index],
             kCdfPrecision);
  if (index != row.escape_index()) return;

  const uint32_t raw = zigzag_overflow(row, value);
  int chunks = bypass_chunks(raw);
  int c = chunks;
  while (c >= static_cast<int>(kBypassChunkMax)) {
    enc.encode_bits(kBypassChunkMax, kBypassChunkBits);
    c -= kBypassChunkMax;
  }
  enc.encode_bits(static_cast<uint32_t>(c), kBypassChunkBits);
  for (int i = 0; i < chunks; ++i) {
    enc.encode_bits((raw >> (i * kBypassChunkBits)) & kBypassChunkMax,
                    kBypassChunkBits);
  }
}

int32_t decode_symbol(RangeDecoder& dec, const CdfRow& row) {
  const uint32_t cum = dec.decode_cum(kCdfPrecision);
  // Binary search for the bin containing cum.
  int lo = 0, hi = row.n_symbols() - 1;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (row.cdf[mid] <= cum) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  dec.advance(row.cdf[lo], row.cdf[lo + 1] - row.cdf[lo], kCdfPrecision);
  if (lo != row.escape_index()) return row.min_symbol + lo;

  uint32_t chunks = 0, v = 0;
  do {
    v = dec.decode_bits(kBypassChunkBits);
    chunks += v;
  } while (v == kBypassChunkMax);
  uint32_t raw = 0;
  for (uint32_t i = 0; i < chunks; ++i) {
    raw |= dec.decode_bits(kBypassChunkBits) << (i * kBypassChunkBits);
  }
  return unzigzag_overflow(row, raw);
}

double symbol_bits(const CdfRow& row, int32_t value) {
  int index = needs_escape(row, value) ? row.escape_index()
                                       : value - row.min_symbol;
  double bits = -std::log2(row.bin_probability(index));
  if (index == row.escape_index()) {
    const uint32_t raw = zigzag_overflow(row, value);
    const int chunks = bypass_chunks(raw);
    bits += kBypassChunkBits * (chunks / kBypassChunkMax + 1 + chunks);
  }
  return bits;
}

}  // namespace pdtd
