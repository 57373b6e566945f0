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

#include "pdtd/coder.hpp"

#include <cassert>

namespace pdtd {

namespace {
constexpr uint32_t kTop = 1u << 24;
}

void RangeEncoder::shift_low() {
  // A carry out of the low 32 bits bumps the cached byte and turns the
  // pending 0xFF run into 0x00s.
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    bytes_.push_back(static_cast<uint8_t>(cache_ + carry));
    while (--cache_size_) {
      bytes_.push_back(static_cast<uint8_t>(0xFF + carry));
    }
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::encode(uint32_t cum, uint32_t freq, int total_bits) {
  assert(total_bits >= 1 && total_bits <= 16);
  assert(freq >= 1);
  assert(cum + freq <= (1u << total_bits));
  range_ >>= total_bits;
  low_ += static_cast<uint64_t>(cum) * range_;
  range_ *= freq;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode_bits(uint32_t value, int nbits) {
  encode(value, 1, nbits);
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(bytes_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  next_byte();  // the encoder's initial zero cache byte
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  if (pos_ >= bytes_.size()) {
    overran_ = true;
    return 0;
  }
  return bytes_[pos_++];
}

uint32_t RangeDecoder::decode_cum(int total_bits) {
  assert(total_bits >= 1 && total_bits <= 16);
  range_ >>= total_bits;
  uint32_t cum = code_ / range_;
  const uint32_t total = 1u << total_bits;
  if (cum >= total) cum = total - 1;  // only reachable on corrupt input
  return cum;
}

void RangeDecoder::advance(uint32_t cum, uint32_t freq, int total_bits) {
  (void)total_bits;  // range_ was already scaled by decode_cum
  code_ -= cum * range_;
  range_ *= freq;
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

uint32_t RangeDecoder::decode_bits(int nbits) {
  const uint32_t v = decode_cum(nbits);
  advance(v, 1, nbits);
  return v;
}

}  // namespace pdtd
