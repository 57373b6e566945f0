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

#include "pdtd/bitstream.hpp"

#include <array>
#include <cstring>

namespace pdtd {

namespace {

constexpr char kMagic[4] = {'P', 'D', 'T', 'D'};

void put_be16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_be64(std::vector<uint8_t>& out, uint64_t v) {
  put_be32(out, static_cast<uint32_t>(v >> 32));
  put_be32(out, static_cast<uint32_t>(v));
}

uint16_t get_be16(const uint8_t* p) {
  return static_cast<uint16_t>((p[0] << 8) | p[1]);
}

uint32_t get_be32(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | p[3];
}

uint64_t get_be64(const uint8_t* p) {
  return (static_cast<uint64_t>(get_be32(p)) << 32) | get_be32(p + 4);
}

// Reflected CRC-32 (polynomial 0xEDB88320), table generated on first use.
const std::array<uint32_t, 256>& crc_table() {
  static const std::array<uint32_t, 256> table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  return table;
}

}  // namespace

uint32_t crc32(std::span<const uint8_t> bytes) {
  uint32_t c = 0xFFFFFFFFu;
  for (uint8_t b : bytes) c = crc_table()[(c ^ b) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void StreamHeader::serialize(std::vector<uint8_t>& out) const {
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(0);  // reserved
  put_be16(out, width);
  put_be16(out, height);
  put_be16(out, c_lat);
  put_be16(out, c_hp);
  out.push_back(group_size);
  out.push_back(unit_count);
  put_be64(out, model_id);
}

StreamHeader StreamHeader::parse(std::span<const uint8_t> bytes) {
  if (bytes.size() < kSize) throw StreamError("stream shorter than header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw StreamError("bad magic (not a PDTD stream)");
  }
  if (bytes[4] != kVersion) {
    throw StreamError("unsupported stream version " + std::to_string(bytes[4]));
  }
  StreamHeader h;
  h.width = get_be16(&bytes[6]);
  h.height = get_be16(&bytes[8]);
  h.c_lat = get_be16(&bytes[10]);
  h.c_hp = get_be16(&bytes[12]);
  h.group_size = bytes[14];
  h.unit_count = bytes[15];
  h.model_id = get_be64(&bytes[16]);
  return h;
}

void append_unit(std::vector<uint8_t>& out, std::span<const uint8_t> z,
                 std::span<const uint8_t> y) {
  put_be32(out, static_cast<uint32_t>(z.size()));
  out.insert(out.end(), z.begin(), z.end());
  put_be32(out, crc32(z));
  put_be32(out, static_cast<uint32_t>(y.size()));
  out.insert(out.end(), y.begin(), y.end());
  put_be32(out, crc32(y));
}

std::optional<UnitPayloads> parse_unit(std::span<const uint8_t> bytes,
                                       bool verify_crc) {
  size_t pos = 0;
  UnitPayloads unit;
  for (int part = 0; part < 2; ++part) {
    if (bytes.size() - pos < 8) return std::nullopt;
    const uint32_t len = get_be32(&bytes[pos]);
    pos += 4;
    if (bytes.size() - pos < static_cast<size_t>(len) + 4) return std::nullopt;
    auto payload = bytes.subspan(pos, len);
    pos += len;
    const uint32_t stored = get_be32(&bytes[pos]);
    pos += 4;
    if (verify_crc && crc32(payload) != stored) {
      throw StreamError("unit checksum mismatch");
    }
    (part == 0 ? unit.z : unit.y) = payload;
  }
  unit.framed_size = pos;
  return unit;
}

std::vector<size_t> unit_sizes(std::span<const uint8_t> body, int max_units) {
  std::vector<size_t> sizes;
  size_t pos = 0;
  while (static_cast<int>(sizes.size()) < max_units) {
    auto unit = parse_unit(body.subspan(pos), /*verify_crc=*/false);
    if (!unit) break;
    sizes.push_back(unit->framed_size);
    pos += unit->framed_size;
  }
  return sizes;
}

}  // namespace pdtd
