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

#ifndef PDTD_CODEC_HPP_
#define PDTD_CODEC_HPP_

#include <span>
#include <vector>

#include "pdtd/bitstream.hpp"
#include "pdtd/checkpoint.hpp"
#include "pdtd/image.hpp"
#include "pdtd/model.hpp"
#include "pdtd/tables.hpp"

namespace pdtd {

// A frozen model + tables pair. compress/decompress are pure given this, so
// concurrent calls on distinct images are safe.
struct CodecContext {
  const HyperpriorModel<float>* model = nullptr;
  const EntropyTables* tables = nullptr;
  uint64_t model_id = 0;

  explicit CodecContext(const Checkpoint& ckpt)
      : model(&ckpt.model), tables(&ckpt.tables), model_id(ckpt.digest) {}
};

// Hyperlatent channels available once y channels [0, y_sent) have been
// transmitted: the same-fraction coupling rule used during training.
inline int hyper_cutoff(int y_sent, int c_lat, int c_hp) {
  const int64_t k =
      (static_cast<int64_t>(y_sent) * c_hp + c_lat - 1) / c_lat;  // ceil
  return static_cast<int>(std::min<int64_t>(k, c_hp));
}

struct CompressStats {
  double estimated_bits = 0.0;  // model-estimated sum of -log2 p, raw bits incl.
  int64_t escape_count = 0;
  int unit_count = 0;
};

// Produces a progressive stream: header + unit_count length-framed units.
// Unit g carries the z slice [cut(g-1), cut(g)) and the y group
// [g*G, min((g+1)*G, c_lat)), with the y group range-coded against the sigma
// the decoder can rebuild from exactly that z prefix.
std::vector<uint8_t> compress_image(const CodecContext& ctx, const Image8& img,
                                    int group_size,
                                    CompressStats* stats = nullptr);

// Decodes all complete units (a trailing partial unit is dropped with a
// warning), zero-fills the rest, and reconstructs. Throws StreamError on
// magic/version/model mismatch or a checksum failure.
Image8 decompress_stream(const CodecContext& ctx,
                         std::span<const uint8_t> stream);

// Same pipeline, but also exposes the decoded integer latents and the unit
// count, for tests and sweeps.
struct DecodeDetail {
  Image8 image;
  Tensor<float> y_hat;  // zero-filled decoded latent
  Tensor<float> z_hat;
  int units_decoded = 0;
  bool partial_tail = false;
};
DecodeDetail decompress_stream_detail(const CodecContext& ctx,
                                      std::span<const uint8_t> stream);

struct TruncateTarget {
  enum class Kind { kBytes, kBpp, kUnits };
  Kind kind = Kind::kBytes;
  double value = 0;

  static TruncateTarget bytes(double n) { return {Kind::kBytes, n}; }
  static TruncateTarget bpp(double v) { return {Kind::kBpp, v}; }
  static TruncateTarget units(double u) { return {Kind::kUnits, u}; }
};

// Largest whole-unit prefix within the target, header rewritten; idempotent.
// Needs only the container structure, never the model.
std::vector<uint8_t> truncate_stream(std::span<const uint8_t> stream,
                                     const TruncateTarget& target);

}  // namespace pdtd

#endif  // PDTD_CODEC_HPP_
