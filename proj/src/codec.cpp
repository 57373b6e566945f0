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

#include "pdtd/codec.hpp"

#include <cmath>
#include <iostream>

#include "pdtd/coder.hpp"
#include "pdtd/gaussian.hpp"
#include "pdtd/quantize.hpp"

namespace pdtd {

namespace {

// The decoder rebuilds sigma for unit g from the rounded z prefix with the
// tail zero-filled, so the encoder must compute it the same way, bit for bit.
Tensor<float> sigma_for_prefix(const CodecContext& ctx,
                               const std::vector<int32_t>& z_sym, int keep_hp,
                               int zh, int zw, Scratch<float>& scratch) {
  const int c_hp = ctx.model->cfg.c_hp;
  Tensor<float> z_hat(c_hp, zh, zw);
  const int plane = zh * zw;
  for (int c = 0; c < keep_hp; ++c) {
    for (int i = 0; i < plane; ++i) {
      z_hat.channel(c)[i] = static_cast<float>(z_sym[static_cast<size_t>(c) * plane + i]);
    }
  }
  return ctx.model->hs.forward(z_hat, scratch);
}

}  // namespace

std::vector<uint8_t> compress_image(const CodecContext& ctx, const Image8& img,
                                    int group_size, CompressStats* stats) {
  const ModelConfig& cfg = ctx.model->cfg;
  if (group_size <= 0 || group_size > cfg.c_lat) {
    throw std::invalid_argument("compress: group_size out of range");
  }
  if (img.width > 0xFFFF || img.height > 0xFFFF) {
    throw StreamError("compress: image dimensions overflow the 16-bit header");
  }
  const int units = cfg.units(group_size);
  if (units > 0xFF) {
    throw StreamError("compress: more than 255 units; increase group_size");
  }

  Scratch<float> scratch;
  const Image8 padded = replicate_pad(img, ModelConfig::kDownTotal);
  const Tensor<float> x = image_to_tensor(padded);
  const Tensor<float> y = ctx.model->ga.forward(x, scratch);
  const Tensor<float> z = ctx.model->ha.forward(y, scratch);
  std::vector<int32_t> y_sym, z_sym;
  round_to_symbols(y, y_sym);
  round_to_symbols(z, z_sym);

  const int y_plane = y.plane(), z_plane = z.plane();
  CompressStats local_stats;
  local_stats.unit_count = units;

  std::vector<uint8_t> out;
  StreamHeader header;
  header.width = static_cast<uint16_t>(img.width);
  header.height = static_cast<uint16_t>(img.height);
  header.c_lat = static_cast<uint16_t>(cfg.c_lat);
  header.c_hp = static_cast<uint16_t>(cfg.c_hp);
  header.group_size = static_cast<uint8_t>(group_size);
  header.unit_count = static_cast<uint8_t>(units);
  header.model_id = ctx.model_id;
  header.serialize(out);

  int z_sent = 0;
  for (int g = 0; g < units; ++g) {
    const int y_from = g * group_size;
    const int y_to = std::min((g + 1) * group_size, cfg.c_lat);
    const int z_to = hyper_cutoff(y_to, cfg.c_lat, cfg.c_hp);

    // z slice for this unit, per-channel factorized rows
    RangeEncoder z_enc;
    for (int c = z_sent; c < z_to; ++c) {
      const CdfRow& row = (*ctx.tables).factorized[c];
      for (int i = 0; i < z_plane; ++i) {
        const int32_t v = z_sym[static_cast<size_t>(c) * z_plane + i];
        encode_symbol(z_enc, row, v);
        local_stats.estimated_bits += symbol_bits(row, v);
        local_stats.escape_count += needs_escape(row, v);
      }
    }
    const std::vector<uint8_t> z_bytes = z_enc.finish();

    // y group coded against the sigma this unit's z prefix implies
    const Tensor<float> sigma =
        sigma_for_prefix(ctx, z_sym, z_to, z.height(), z.width(), scratch);
    RangeEncoder y_enc;
    for (int c = y_from; c < y_to; ++c) {
      for (int i = 0; i < y_plane; ++i) {
        const double s = sigma.channel(c)[i];
        const CdfRow& row =
            (*ctx.tables).gaussian[scale_index(s, (*ctx.tables).scale_table)];
        const int32_t v = y_sym[static_cast<size_t>(c) * y_plane + i];
        encode_symbol(y_enc, row, v);
        local_stats.estimated_bits += symbol_bits(row, v);
        local_stats.escape_count += needs_escape(row, v);
      }
    }
    const std::vector<uint8_t> y_bytes = y_enc.finish();

    append_unit(out, z_bytes, y_bytes);
    z_sent = z_to;
  }
  if (stats) *stats = local_stats;
  return out;
}

DecodeDetail decompress_stream_detail(const CodecContext& ctx,
                                      std::span<const uint8_t> stream) {
  const StreamHeader header = StreamHeader::parse(stream);
  if (header.model_id != ctx.model_id) {
    throw StreamError("decompress: stream was produced by a different model");
  }
  const ModelConfig& cfg = ctx.model->cfg;
  if (header.c_lat != cfg.c_lat || header.c_hp != cfg.c_hp) {
    throw StreamError("decompress: channel counts disagree with the model");
  }
  const int group_size = header.group_size;
  if (group_size <= 0) throw StreamError("decompress: zero group size");

  const int pw = (header.width + ModelConfig::kDownTotal - 1) /
                 ModelConfig::kDownTotal * ModelConfig::kDownTotal;
  const int ph = (header.height + ModelConfig::kDownTotal - 1) /
                 ModelConfig::kDownTotal * ModelConfig::kDownTotal;
  const int yh = ph / ModelConfig::kDownLat, yw = pw / ModelConfig::kDownLat;
  const int zh = yh / ModelConfig::kDownHp, zw = yw / ModelConfig::kDownHp;
  const int y_plane = yh * yw, z_plane = zh * zw;

  std::vector<int32_t> y_sym(static_cast<size_t>(cfg.c_lat) * y_plane, 0);
  std::vector<int32_t> z_sym(static_cast<size_t>(cfg.c_hp) * z_plane, 0);

  Scratch<float> scratch;
  DecodeDetail detail;
  size_t pos = StreamHeader::kSize;
  int z_sent = 0, y_sent = 0;
  for (int g = 0; g < header.unit_count; ++g) {
    auto unit = parse_unit(stream.subspan(pos), /*verify_crc=*/true);
    if (!unit) {
      std::cerr << "decompress: trailing partial unit discarded\n";
      detail.partial_tail = true;
      break;
    }
    pos += unit->framed_size;

    const int y_to = std::min((g + 1) * group_size, static_cast<int>(cfg.c_lat));
    const int z_to = hyper_cutoff(y_to, cfg.c_lat, cfg.c_hp);

    RangeDecoder z_dec(unit->z);
    for (int c = z_sent; c < z_to; ++c) {
      const CdfRow& row = (*ctx.tables).factorized[c];
      for (int i = 0; i < z_plane; ++i) {
        z_sym[static_cast<size_t>(c) * z_plane + i] = decode_symbol(z_dec, row);
      }
    }

    const Tensor<float> sigma =
        sigma_for_prefix(ctx, z_sym, z_to, zh, zw, scratch);
    RangeDecoder y_dec(unit->y);
    for (int c = g * group_size; c < y_to; ++c) {
      for (int i = 0; i < y_plane; ++i) {
        const double s = sigma.channel(c)[i];
        const CdfRow& row =
            (*ctx.tables).gaussian[scale_index(s, (*ctx.tables).scale_table)];
        y_sym[static_cast<size_t>(c) * y_plane + i] = decode_symbol(y_dec, row);
      }
    }
    z_sent = z_to;
    y_sent = y_to;
    ++detail.units_decoded;
  }

  detail.y_hat = Tensor<float>(cfg.c_lat, yh, yw);
  for (size_t i = 0; i < y_sym.size(); ++i) {
    detail.y_hat[i] = static_cast<float>(y_sym[i]);
  }
  detail.z_hat = Tensor<float>(cfg.c_hp, zh, zw);
  for (size_t i = 0; i < z_sym.size(); ++i) {
    detail.z_hat[i] = static_cast<float>(z_sym[i]);
  }
  (void)y_sent;

  const Tensor<float> xh = ctx.model->gs.forward(detail.y_hat, scratch);
  Image8 padded_img = tensor_to_image(xh);  // clamps to [0,1]
  detail.image = crop(padded_img, 0, 0, header.width, header.height);
  return detail;
}

Image8 decompress_stream(const CodecContext& ctx,
                         std::span<const uint8_t> stream) {
  return decompress_stream_detail(ctx, stream).image;
}

std::vector<uint8_t> truncate_stream(std::span<const uint8_t> stream,
                                     const TruncateTarget& target) {
  StreamHeader header = StreamHeader::parse(stream);
  const auto sizes =
      unit_sizes(stream.subspan(StreamHeader::kSize), header.unit_count);

  size_t budget_bytes = 0;
  int budget_units = -1;
  switch (target.kind) {
    case TruncateTarget::Kind::kBytes:
      budget_bytes = target.value < 0 ? 0 : static_cast<size_t>(target.value);
      break;
    case TruncateTarget::Kind::kBpp: {
      const double bits = target.value * header.width * header.height;
      budget_bytes = bits <= 0 ? 0 : static_cast<size_t>(bits / 8.0);
      break;
    }
    case TruncateTarget::Kind::kUnits:
      budget_units = target.value < 0 ? 0 : static_cast<int>(target.value);
      break;
  }

  size_t keep_bytes = 0;
  int keep_units = 0;
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (budget_units >= 0) {
      if (keep_units >= budget_units) break;
    } else if (StreamHeader::kSize + keep_bytes + sizes[i] > budget_bytes) {
      break;
    }
    keep_bytes += sizes[i];
    ++keep_units;
  }

  header.unit_count = static_cast<uint8_t>(keep_units);
  std::vector<uint8_t> out;
  out.reserve(StreamHeader::kSize + keep_bytes);
  header.serialize(out);
  const auto body = stream.subspan(StreamHeader::kSize, keep_bytes);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace pdtd
