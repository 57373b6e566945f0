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

#include "pdtd/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "pdtd/metrics.hpp"

namespace pdtd {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> list_images(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".ppm") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<RDRecord> sweep_one_image(const CodecContext& ctx, const Image8& img,
                                      const std::string& id,
                                      const SweepOptions& opts) {
  const Tensor<float> ref = image_to_tensor(img);
  const double pixels = static_cast<double>(img.width) * img.height;

  const auto stream = compress_image(ctx, img, opts.group_size);
  const int units = ctx.model->cfg.units(opts.group_size);

  std::vector<RDRecord> records;
  for (int u = 0; u <= units; ++u) {
    const auto prefix = truncate_stream(stream, TruncateTarget::units(u));
    const Image8 recon = decompress_stream(ctx, prefix);
    const Tensor<float> rec = image_to_tensor(recon);
    RDRecord r;
    r.image_id = id;
    r.units = u;
    r.fraction =
        std::min(u * opts.group_size, ctx.model->cfg.c_lat) /
        static_cast<double>(ctx.model->cfg.c_lat);
    r.bpp = prefix.size() * 8.0 / pixels;
    r.psnr_db = psnr(ref, rec);
    r.ms_ssim = ms_ssim(ref, rec);
    records.push_back(std::move(r));
    if (!opts.export_recon_dir.empty()) {
      fs::create_directories(opts.export_recon_dir);
      char name[256];
      std::snprintf(name, sizeof(name), "%s_u%03d.png", id.c_str(), u);
      save_png((fs::path(opts.export_recon_dir) / name).string(), recon);
    }
  }
  return records;
}

std::vector<RDRecord> sweep_one(const CodecContext& ctx, const std::string& path,
                                const SweepOptions& opts) {
  const Image8 img = load_image(path);
  const std::string id = fs::path(path).stem().string();
  if (!opts.eval_patches) return sweep_one_image(ctx, img, id, opts);

  // Kodak-style patch protocol: resize to 512x512, four 256x256 quadrants.
  const Image8 square = resize_bilinear(img, 512, 512);
  std::vector<RDRecord> records;
  int p = 0;
  for (int qy = 0; qy < 2; ++qy) {
    for (int qx = 0; qx < 2; ++qx, ++p) {
      const Image8 patch = crop(square, qx * 256, qy * 256, 256, 256);
      auto rs = sweep_one_image(ctx, patch, id + "_p" + std::to_string(p), opts);
      records.insert(records.end(), rs.begin(), rs.end());
    }
  }
  return records;
}

}  // namespace

std::vector<RDRecord> rd_sweep(const CodecContext& ctx,
                               const std::string& image_dir,
                               const SweepOptions& opts) {
  const auto files = list_images(image_dir);
  if (files.empty()) {
    throw std::runtime_error("rd_sweep: no images under " + image_dir);
  }
  int threads = opts.threads > 0
                    ? opts.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(files.size())));

  std::vector<std::vector<RDRecord>> per_file(files.size());
  std::vector<std::string> failures(files.size());
  auto worker = [&](int t) {
    for (size_t i = t; i < files.size(); i += threads) {
      try {
        per_file[i] = sweep_one(ctx, files[i], opts);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  std::vector<RDRecord> records;
  for (size_t i = 0; i < files.size(); ++i) {
    if (!failures[i].empty()) {
      std::cerr << "rd_sweep: " << files[i] << " failed: " << failures[i] << "\n";
      continue;
    }
    records.insert(records.end(), per_file[i].begin(), per_file[i].end());
  }
  std::sort(records.begin(), records.end(), [](const RDRecord& a, const RDRecord& b) {
    return a.image_id != b.image_id ? a.image_id < b.image_id : a.units < b.units;
  });
  return records;
}

void write_rd_csv(const std::string& path, const std::vector<RDRecord>& records) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_rd_csv: cannot open " + path);
  std::fprintf(f, "image_id,units,fraction,bpp,psnr_db,ms_ssim\n");
  for (const auto& r : records) {
    std::fprintf(f, "%s,%d,%.9g,%.9g,%.9g,%.9g\n", r.image_id.c_str(), r.units,
                 r.fraction, r.bpp, r.psnr_db, r.ms_ssim);
  }
  std::fclose(f);
}

std::vector<RDRecord> read_rd_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_rd_csv: cannot open " + path);
  std::vector<RDRecord> records;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    RDRecord r;
    std::string field;
    std::getline(ss, r.image_id, ',');
    std::getline(ss, field, ',');
    r.units = std::stoi(field);
    std::getline(ss, field, ',');
    r.fraction = std::stod(field);
    std::getline(ss, field, ',');
    r.bpp = std::stod(field);
    std::getline(ss, field, ',');
    r.psnr_db = std::stod(field);
    std::getline(ss, field, ',');
    r.ms_ssim = std::stod(field);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<CurvePoint> mean_curve(const std::vector<RDRecord>& records) {
  std::map<int, std::vector<const RDRecord*>> by_units;
  for (const auto& r : records) by_units[r.units].push_back(&r);
  std::vector<CurvePoint> curve;
  for (const auto& [units, rs] : by_units) {
    CurvePoint p{units, 0, 0, 0, 0};
    for (const auto* r : rs) {
      p.fraction += r->fraction / rs.size();
      p.bpp += r->bpp / rs.size();
      // +inf psnr (identical images) would poison the mean; cap at 99 dB
      p.psnr_db += std::min(r->psnr_db, 99.0) / rs.size();
      p.ms_ssim += r->ms_ssim / rs.size();
    }
    curve.push_back(p);
  }
  return curve;
}

void write_rd_plot_svg(const std::string& csv_path, const std::string& metric,
                       const std::string& out_svg) {
  const auto records = read_rd_csv(csv_path);
  if (records.empty()) throw std::runtime_error("write_rd_plot_svg: empty CSV");
  const auto curve = mean_curve(records);
  const bool use_psnr = metric == "psnr_db";
  if (!use_psnr && metric != "ms_ssim") {
    throw std::invalid_argument("write_rd_plot_svg: unknown metric " + metric);
  }

  const double w = 640, h = 480, ml = 70, mr = 20, mt = 30, mb = 50;
  double x_max = 0, y_min = 1e300, y_max = -1e300;
  for (const auto& p : curve) {
    x_max = std::max(x_max, p.bpp);
    const double v = use_psnr ? p.psnr_db : p.ms_ssim;
    y_min = std::min(y_min, v);
    y_max = std::max(y_max, v);
  }
  if (x_max <= 0) x_max = 1;
  if (y_max <= y_min) y_max = y_min + 1;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;
  auto sx = [&](double bpp) { return ml + (w - ml - mr) * bpp / x_max; };
  auto sy = [&](double v) {
    return h - mb - (h - mt - mb) * (v - y_min) / (y_max - y_min);
  };

  std::ofstream f(out_svg);
  if (!f) throw std::runtime_error("write_rd_plot_svg: cannot open " + out_svg);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
    << h << "' viewBox='0 0 " << w << " " << h << "'>\n"
    << "<rect width='100%' height='100%' fill='white'/>\n"
    << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr
    << "' y2='" << h - mb << "' stroke='black'/>\n"
    << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
    << h - mb << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double bx = x_max * i / 5.0;
    f << "<text x='" << sx(bx) << "' y='" << h - mb + 20
      << "' font-size='12' text-anchor='middle'>" << std::round(bx * 1000) / 1000
      << "</text>\n";
    const double vy = y_min + (y_max - y_min) * i / 5.0;
    f << "<text x='" << ml - 8 << "' y='" << sy(vy) + 4
      << "' font-size='12' text-anchor='end'>" << std::round(vy * 1000) / 1000
      << "</text>\n";
  }
  f << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 10
    << "' font-size='14' text-anchor='middle'>bpp</text>\n"
    << "<text x='" << (ml + w - mr) / 2 << "' y='" << mt - 10
    << "' font-size='14' text-anchor='middle'>" << metric
    << " (mean over images)</text>\n<polyline fill='none' stroke='#1f77b4' "
       "stroke-width='2' points='";
  for (const auto& p : curve) {
    f << sx(p.bpp) << "," << sy(use_psnr ? p.psnr_db : p.ms_ssim) << " ";
  }
  f << "'/>\n";
  for (const auto& p : curve) {
    f << "<circle cx='" << sx(p.bpp) << "' cy='"
      << sy(use_psnr ? p.psnr_db : p.ms_ssim) << "' r='3' fill='#1f77b4'/>\n";
  }
  f << "</svg>\n";
}

BaselineReport compare_baseline(const CodecContext& dtd,
                                const CodecContext& standard,
                                const std::string& image_dir,
                                const SweepOptions& opts) {
  BaselineReport report;
  report.dtd_curve = mean_curve(rd_sweep(dtd, image_dir, opts));
  report.standard_curve = mean_curve(rd_sweep(standard, image_dir, opts));
  if (report.dtd_curve.size() != report.standard_curve.size()) {
    throw std::runtime_error("compare_baseline: models disagree on unit count");
  }

  const int c_lat = dtd.model->cfg.c_lat;
  auto at_fraction = [&](const std::vector<CurvePoint>& curve, double frac) {
    const double want_units = frac * c_lat / opts.group_size;
    const CurvePoint* best = &curve.front();
    for (const auto& p : curve) {
      if (std::abs(p.units - want_units) < std::abs(best->units - want_units)) {
        best = &p;
      }
    }
    return best;
  };

  std::ostringstream text;
  text << "kept%  units  dtd_msssim  standard_msssim  gap\n";
  for (double frac : {0.3, 0.5, 0.7, 1.0}) {
    const CurvePoint* d = at_fraction(report.dtd_curve, frac);
    const CurvePoint* s = at_fraction(report.standard_curve, frac);
    const double gap = d->ms_ssim - s->ms_ssim;
    char line[160];
    std::snprintf(line, sizeof(line), "%5.0f  %5d  %10.6f  %15.6f  %+.6f\n",
                  frac * 100, d->units, d->ms_ssim, s->ms_ssim, gap);
    text << line;
    if (frac == 0.3) report.gap_30 = gap;
    if (frac == 0.5) report.gap_50 = gap;
    if (frac == 0.7) report.gap_70 = gap;
    if (frac == 1.0) report.gap_full = gap;
  }
  report.text = text.str();
  return report;
}

}  // namespace pdtd
