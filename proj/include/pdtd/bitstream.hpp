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

#ifndef PDTD_BITSTREAM_HPP_
#define PDTD_BITSTREAM_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pdtd {

class StreamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed 24-byte stream header, big-endian integers:
//   "PDTD" | version | reserved | width | height | c_lat | c_hp |
//   group_size | unit_count | model_id
struct StreamHeader {
  static constexpr uint8_t kVersion = 1;
  static constexpr size_t kSize = 24;

  uint16_t width = 0;    // original (pre-pad) dimensions
  uint16_t height = 0;
  uint16_t c_lat = 0;
  uint16_t c_hp = 0;
  uint8_t group_size = 0;
  uint8_t unit_count = 0;
  uint64_t model_id = 0;  // checkpoint digest the decoder must match

  void serialize(std::vector<uint8_t>& out) const;
  // Checks magic and version; throws StreamError otherwise.
  static StreamHeader parse(std::span<const uint8_t> bytes);
};

uint32_t crc32(std::span<const uint8_t> bytes);

// One progressive unit: the z slice and y group payloads, each framed as
// 32-bit length + payload + 32-bit crc.
struct UnitPayloads {
  std::span<const uint8_t> z;
  std::span<const uint8_t> y;
  size_t framed_size = 0;  // total bytes consumed including framing
};

void append_unit(std::vector<uint8_t>& out, std::span<const uint8_t> z,
                 std::span<const uint8_t> y);

// Parses the unit starting at bytes[0]. Returns nullopt when the unit is
// incomplete (trailing partial data); throws StreamError on a checksum
// mismatch when verify_crc is set.
std::optional<UnitPayloads> parse_unit(std::span<const uint8_t> bytes,
                                       bool verify_crc);

// Walks whole units without checksum verification; used for truncation.
std::vector<size_t> unit_sizes(std::span<const uint8_t> body, int max_units);

}  // namespace pdtd

#endif  // PDTD_BITSTREAM_HPP_
