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

// pdtd: progressive image codec with double-tail-drop training.
// Subcommands: train, compress, decompress, truncate, sweep, compare.
// Exit codes: 0 success, 1 usage error, 2 data/model error.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "pdtd/codec.hpp"
#include "pdtd/sweep.hpp"
#include "pdtd/trainer.hpp"

namespace fs = std::filesystem;
using namespace pdtd;

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

// The effective configuration is echoed to stderr and written next to the
// primary output, so every run is reproducible from its artifacts.
void echo_config(const std::vector<std::pair<std::string, std::string>>& kv,
                 const std::string& file_path) {
  std::string text;
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  std::cerr << "effective config:\n" << text;
  if (!file_path.empty()) {
    std::ofstream f(file_path);
    f << text;
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// key=value config file ('#' comments). Loaded before flag parsing, so
// command-line flags override file values.
void apply_config_file(const std::string& path, TrainConfig& tc) {
  std::ifstream f(path);
  if (!f) throw CLI::FileError::Missing(path);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.pop_back();
    }
    size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) {
      ++start;
    }
    line.erase(0, start);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ParseError("config line " + std::to_string(lineno) +
                                " is not key=value: " + line,
                            CLI::ExitCodes::InvalidError);
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "lambda") tc.model.lambda = std::stod(value);
    else if (key == "u1") tc.model.u1 = std::stod(value);
    else if (key == "u2") tc.model.u2 = std::stod(value);
    else if (key == "c_lat") tc.model.c_lat = std::stoi(value);
    else if (key == "c_hp") tc.model.c_hp = std::stoi(value);
    else if (key == "base_width") tc.model.base_width = std::stoi(value);
    else if (key == "group_size") tc.model.group_size = std::stoi(value);
    else if (key == "lr") tc.lr = std::stod(value);
    else if (key == "batch") tc.batch = std::stoi(value);
    else if (key == "epochs") tc.epochs = std::stoi(value);
    else if (key == "patch") tc.patch = std::stoi(value);
    else if (key == "patches_per_image") tc.patches_per_image = std::stoi(value);
    else if (key == "val_fraction") tc.val_fraction = std::stod(value);
    else if (key == "seed") tc.seed = std::stoull(value);
    else if (key == "threads") tc.threads = std::stoi(value);
    else if (key == "data_dir") tc.data_dir = value;
    else if (key == "out_dir") tc.out_dir = value;
    else {
      throw CLI::ParseError("unknown config key: " + key,
                            CLI::ExitCodes::InvalidError);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdtd: progressive learned image codec (double-tail-drop)"};
  app.require_subcommand(1);

  // ---- train ----
  TrainConfig tc;
  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "train a model on an image folder");
  train_cmd->add_option("--config", config_path,
                        "key=value config file; flags override");
  train_cmd->add_option("--lambda", tc.model.lambda, "RD trade-off weight");
  train_cmd->add_option("--u1", tc.model.u1, "keep-fraction lower bound");
  train_cmd->add_option("--u2", tc.model.u2, "keep-fraction upper bound");
  train_cmd->add_option("--c_lat", tc.model.c_lat, "latent channels");
  train_cmd->add_option("--c_hp", tc.model.c_hp, "hyperlatent channels");
  train_cmd->add_option("--base_width", tc.model.base_width, "conv width");
  train_cmd->add_option("--group_size", tc.model.group_size,
                        "progressive unit granularity");
  train_cmd->add_option("--lr", tc.lr, "Adam learning rate");
  train_cmd->add_option("--batch", tc.batch, "batch size");
  train_cmd->add_option("--epochs", tc.epochs, "training epochs");
  train_cmd->add_option("--patch", tc.patch, "training patch size");
  train_cmd->add_option("--patches_per_image", tc.patches_per_image,
                        "random crops per source image");
  train_cmd->add_option("--val_fraction", tc.val_fraction, "held-out fraction");
  train_cmd->add_option("--seed", tc.seed, "master seed for all randomness");
  train_cmd->add_option("--threads", tc.threads, "worker threads (0 = auto)");
  train_cmd->add_option("--data_dir", tc.data_dir, "training image folder")
      ->required();
  train_cmd->add_option("--out_dir", tc.out_dir, "output directory")->required();

  // ---- compress ----
  std::string in_path, out_path, model_path;
  int group = 8;
  auto* compress_cmd = app.add_subcommand("compress", "image -> .pdtd stream");
  compress_cmd->add_option("--in", in_path, "input image (png/ppm)")->required();
  compress_cmd->add_option("--model", model_path, "checkpoint file")->required();
  compress_cmd->add_option("--out", out_path, "output .pdtd stream")->required();
  compress_cmd->add_option("--group", group, "y channels per progressive unit");

  // ---- decompress ----
  auto* decompress_cmd = app.add_subcommand("decompress", ".pdtd stream -> image");
  decompress_cmd->add_option("--in", in_path, "input .pdtd stream")->required();
  decompress_cmd->add_option("--model", model_path, "checkpoint file")->required();
  decompress_cmd->add_option("--out", out_path, "output image (png/ppm)")
      ->required();

  // ---- truncate ----
  double t_bpp = -1, t_bytes = -1;
  int t_units = -1;
  auto* truncate_cmd =
      app.add_subcommand("truncate", "keep the largest whole-unit prefix");
  truncate_cmd->add_option("--in", in_path, "input .pdtd stream")->required();
  truncate_cmd->add_option("--out", out_path, "output .pdtd stream")->required();
  auto* ob = truncate_cmd->add_option("--bytes", t_bytes, "byte budget");
  auto* op = truncate_cmd->add_option("--bpp", t_bpp, "bits-per-pixel budget");
  auto* ou = truncate_cmd->add_option("--units", t_units, "unit count to keep");
  ob->excludes(op)->excludes(ou);
  op->excludes(ou);

  // ---- sweep ----
  std::string image_dir, csv_path, recon_dir;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "progressive RD sweep over all unit counts");
  sweep_cmd->add_option("--model", model_path, "checkpoint file")->required();
  sweep_cmd->add_option("--images", image_dir, "evaluation image folder")
      ->required();
  sweep_cmd->add_option("--out", csv_path, "output CSV path")->required();
  sweep_cmd->add_option("--group", group, "y channels per progressive unit")
      ->default_val(4);
  sweep_cmd->add_option("--export-recon", recon_dir,
                        "directory for reconstructed images (optional)");
  bool eval_patches = false;
  sweep_cmd->add_flag("--patches", eval_patches,
                      "resize to 512x512 and evaluate four 256x256 patches "
                      "instead of the whole padded image");

  // ---- compare ----
  std::string standard_path, report_path;
  auto* compare_cmd = app.add_subcommand(
      "compare", "DTD vs standard model under truncation");
  compare_cmd->add_option("--dtd", model_path, "DTD checkpoint")->required();
  compare_cmd->add_option("--standard", standard_path, "standard checkpoint")
      ->required();
  compare_cmd->add_option("--images", image_dir, "evaluation image folder")
      ->required();
  compare_cmd->add_option("--out", report_path, "report file (optional)");
  compare_cmd->add_option("--group", group, "y channels per progressive unit")
      ->default_val(4);

  try {
    // Config defaults load before flag parsing so flags win.
    for (int i = 1; i + 1 < argc; ++i) {
      if (std::string(argv[i]) == "--config") apply_config_file(argv[i + 1], tc);
    }
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  try {
    if (*train_cmd) {
      echo_config(
          {{"lambda", fmt(tc.model.lambda)},
           {"u1", fmt(tc.model.u1)},
           {"u2", fmt(tc.model.u2)},
           {"c_lat", std::to_string(tc.model.c_lat)},
           {"c_hp", std::to_string(tc.model.c_hp)},
           {"base_width", std::to_string(tc.model.base_width)},
           {"group_size", std::to_string(tc.model.group_size)},
           {"lr", fmt(tc.lr)},
           {"batch", std::to_string(tc.batch)},
           {"epochs", std::to_string(tc.epochs)},
           {"patch", std::to_string(tc.patch)},
           {"patches_per_image", std::to_string(tc.patches_per_image)},
           {"val_fraction", fmt(tc.val_fraction)},
           {"seed", std::to_string(tc.seed)},
           {"data_dir", tc.data_dir},
           {"out_dir", tc.out_dir}},
          (fs::create_directories(tc.out_dir),
           (fs::path(tc.out_dir) / "effective.cfg").string()));
      const TrainResult r = train(tc);
      std::fprintf(stderr, "checkpoint %s digest %016" PRIx64 "\n",
                   r.checkpoint_path.c_str(), r.digest);
    } else if (*compress_cmd) {
      Checkpoint ckpt = load_checkpoint(model_path);
      CodecContext ctx(ckpt);
      CompressStats stats;
      const auto stream = compress_image(ctx, load_image(in_path), group, &stats);
      write_file(out_path, stream);
      std::fprintf(stderr,
                   "compressed %s -> %s: %zu bytes, %d units, ~%.0f bits "
                   "estimated\n",
                   in_path.c_str(), out_path.c_str(), stream.size(),
                   stats.unit_count, stats.estimated_bits);
      if (stats.escape_count > 0) {
        std::fprintf(stderr, "note: %" PRId64 " escape-coded symbols\n",
                     stats.escape_count);
      }
    } else if (*decompress_cmd) {
      Checkpoint ckpt = load_checkpoint(model_path);
      CodecContext ctx(ckpt);
      const auto stream = read_file(in_path);
      save_image(out_path, decompress_stream(ctx, stream));
      std::fprintf(stderr, "decompressed %s -> %s\n", in_path.c_str(),
                   out_path.c_str());
    } else if (*truncate_cmd) {
      const auto stream = read_file(in_path);
      TruncateTarget target = TruncateTarget::bytes(1e18);
      if (t_bytes >= 0) target = TruncateTarget::bytes(t_bytes);
      if (t_bpp >= 0) target = TruncateTarget::bpp(t_bpp);
      if (t_units >= 0) target = TruncateTarget::units(t_units);
      const auto out = truncate_stream(stream, target);
      write_file(out_path, out);
      std::fprintf(stderr, "truncated %zu -> %zu bytes (%d units)\n",
                   stream.size(), out.size(),
                   StreamHeader::parse(out).unit_count);
    } else if (*sweep_cmd) {
      Checkpoint ckpt = load_checkpoint(model_path);
      CodecContext ctx(ckpt);
      SweepOptions opts;
      opts.group_size = group;
      opts.export_recon_dir = recon_dir;
      opts.eval_patches = eval_patches;
      const auto records = rd_sweep(ctx, image_dir, opts);
      write_rd_csv(csv_path, records);
      write_rd_plot_svg(csv_path, "psnr_db", csv_path + ".psnr.svg");
      write_rd_plot_svg(csv_path, "ms_ssim", csv_path + ".msssim.svg");
      echo_config({{"model", model_path},
                   {"images", image_dir},
                   {"group", std::to_string(group)},
                   {"out", csv_path}},
                  csv_path + ".effective.cfg");
      std::fprintf(stderr, "wrote %zu records to %s (+ 2 SVG plots)\n",
                   records.size(), csv_path.c_str());
    } else if (*compare_cmd) {
      Checkpoint dtd_ckpt = load_checkpoint(model_path);
      Checkpoint std_ckpt = load_checkpoint(standard_path);
      CodecContext dtd_ctx(dtd_ckpt), std_ctx(std_ckpt);
      SweepOptions opts;
      opts.group_size = group;
      const BaselineReport report =
          compare_baseline(dtd_ctx, std_ctx, image_dir, opts);
      std::fputs(report.text.c_str(), stdout);
      if (!report_path.empty()) {
        std::ofstream f(report_path);
        f << report.text;
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
