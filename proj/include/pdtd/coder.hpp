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

#ifndef PDTD_CODER_HPP_
#define PDTD_CODER_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace pdtd {

// Range coder with 64-bit low register and byte-wise renormalization.
// Carries are deferred through a cache byte plus a run of 0xFF bytes, so the
// emitted stream never needs back-patching. Cumulative frequencies are given
// on a power-of-two total (<= 16 bits). decode(encode(s)) == s exactly for
// any symbol sequence; encoder and decoder share only the CDF tables.
//
// The first emitted byte is always zero (the initial cache); the decoder
// consumes and ignores it. An empty payload flushes to 5 bytes.
class RangeEncoder {
 public:
  // Narrow the interval to [cum, cum+freq) / 2^total_bits. freq >= 1.
  void encode(uint32_t cum, uint32_t freq, int total_bits);

  // Raw bits on a uniform distribution (bypass path). nbits in [1, 16].
  void encode_bits(uint32_t value, int nbits);

  // Flushes the state; the encoder must not be reused afterwards.
  std::vector<uint8_t> finish();

  size_t size_bound() const { return bytes_.size() + 16; }

 private:
  void shift_low();

  std::vector<uint8_t> bytes_;
  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);

  // Returns the scaled cumulative value in [0, 2^total_bits); the caller
  // locates the symbol whose [cum, cum+freq) contains it, then calls advance
  // with that interval.
  uint32_t decode_cum(int total_bits);
  void advance(uint32_t cum, uint32_t freq, int total_bits);

  uint32_t decode_bits(int nbits);

  // True once the decoder has consumed bytes past the end of the buffer
  // (reads beyond the end yield zeros). Exact streams never trip this before
  // their last symbol is decoded.
  bool overran() const { return overran_; }

 private:
  uint8_t next_byte();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
  bool overran_ = false;
};

}  // namespace pdtd

#endif  // PDTD_CODER_HPP_
