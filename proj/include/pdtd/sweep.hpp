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

#ifndef PDTD_SWEEP_HPP_
#define PDTD_SWEEP_HPP_

#include <string>
#include <vector>

#include "pdtd/codec.hpp"

namespace pdtd {

// One sweep sample: image at a whole-unit prefix.
struct RDRecord {
  std::string image_id;
  int units = 0;
  double fraction = 0.0;  // kept y channels / c_lat
  double bpp = 0.0;       // file bytes * 8 / original pixels
  double psnr_db = 0.0;
  double ms_ssim = 0.0;
};

struct SweepOptions {
  int group_size = 4;
  int threads = 0;               // 0 = hardware_concurrency
  std::string export_recon_dir;  // when set, reconstructions saved as PNG
  // Whole-image (padded) evaluation by default. The patch alternative
  // resizes each image to 512x512 and evaluates its four 256x256 quadrants
  // separately, the way the Kodak protocol does.
  bool eval_patches = false;
};

// Compress each image once, truncate at every unit count (header-only
// included), decompress, measure. Per-image failures are reported on stderr
// and the sweep continues. Records come back sorted by (image_id, units).
std::vector<RDRecord> rd_sweep(const CodecContext& ctx,
                               const std::string& image_dir,
                               const SweepOptions& opts);

// CSV schema: image_id,units,fraction,bpp,psnr_db,ms_ssim
void write_rd_csv(const std::string& path, const std::vector<RDRecord>& records);
std::vector<RDRecord> read_rd_csv(const std::string& path);

// Mean metric-vs-bpp curve rendered from the CSV alone.
// metric is "psnr_db" or "ms_ssim".
void write_rd_plot_svg(const std::string& csv_path, const std::string& metric,
                       const std::string& out_svg);

// Mean metric across images at each unit count, sorted by units.
struct CurvePoint {
  int units;
  double fraction, bpp, psnr_db, ms_ssim;
};
std::vector<CurvePoint> mean_curve(const std::vector<RDRecord>& records);

// Side-by-side truncation behaviour of a DTD model and a standard one,
// reporting the MS-SSIM gap at 30/50/70% kept channels and at full rate.
struct BaselineReport {
  std::vector<CurvePoint> dtd_curve;
  std::vector<CurvePoint> standard_curve;
  double gap_30 = 0.0;  // dtd - standard at ~30% kept channels
  double gap_50 = 0.0;
  double gap_70 = 0.0;
  double gap_full = 0.0;
  std::string text;  // printable summary
};
BaselineReport compare_baseline(const CodecContext& dtd,
                                const CodecContext& standard,
                                const std::string& image_dir,
                                const SweepOptions& opts);

}  // namespace pdtd

#endif  // PDTD_SWEEP_HPP_
