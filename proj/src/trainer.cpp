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

#include "pdtd/trainer.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "pdtd/adam.hpp"
#include "pdtd/checkpoint.hpp"
#include "pdtd/manifest.hpp"
#include "pdtd/train_step.hpp"

namespace pdtd {

namespace fs = std::filesystem;

namespace {

constexpr uint64_t kShuffleSalt = 0x73687566666c65ULL;
constexpr uint64_t kStepSalt = 0x7374657073ULL;

void shuffle_indices(std::vector<size_t>& idx, Rng& rng) {
  for (size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.next_below(i)]);
  }
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  cfg.model.validate();
  if (cfg.batch <= 0 || cfg.epochs <= 0) {
    throw std::invalid_argument("train: batch and epochs must be positive");
  }
  fs::create_directories(cfg.out_dir);
  const std::string ckpt_path =
      (fs::path(cfg.out_dir) / "checkpoint.pdtdc").string();

  PatchSpec patch_spec;
  patch_spec.patch_size = cfg.patch;
  patch_spec.patches_per_image = cfg.patches_per_image;
  patch_spec.split_seed = cfg.seed;
  patch_spec.val_fraction = cfg.val_fraction;
  Manifest manifest = ingest(cfg.data_dir, patch_spec);
  save_manifest((fs::path(cfg.out_dir) / "manifest.jsonl").string(), manifest);
  const std::vector<size_t> train_indices = manifest.split_indices(false);
  if (train_indices.size() < static_cast<size_t>(cfg.batch)) {
    throw std::runtime_error("train: fewer training patches than batch size");
  }

  HyperpriorModel<float> model(cfg.model);
  model.init_params(cfg.seed);
  auto params = model.params();
  Adam<float> adam(params, cfg.lr);
  int64_t start_epoch = 0;
  int64_t global_step = 0;

  if (fs::exists(ckpt_path)) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    if (ckpt.model.cfg.c_lat != cfg.model.c_lat ||
        ckpt.model.cfg.c_hp != cfg.model.c_hp ||
        ckpt.model.cfg.base_width != cfg.model.base_width) {
      throw std::runtime_error("train: existing checkpoint has a different "
                               "architecture; refusing to resume");
    }
    if (!ckpt.has_train) {
      throw std::runtime_error("train: checkpoint has no optimizer state");
    }
    auto src = ckpt.model.params();
    for (size_t v = 0; v < params.size(); ++v) {
      std::copy(src[v].data, src[v].data + src[v].size, params[v].data);
    }
    adam.restore(ckpt.train.adam_t, std::move(ckpt.train.m),
                 std::move(ckpt.train.v));
    start_epoch = ckpt.train.epoch;
    global_step = ckpt.train.step;
    std::cerr << "train: resuming from epoch " << start_epoch << "\n";
  }

  std::FILE* csv = std::fopen(
      (fs::path(cfg.out_dir) / "metrics.csv").string().c_str(),
      global_step == 0 ? "w" : "a");
  if (!csv) throw std::runtime_error("train: cannot open metrics.csv");
  if (global_step == 0) {
    std::fprintf(csv, "step,rate_y_bpp,rate_z_bpp,mse,total\n");
  }

  HyperpriorModel<float> grads(cfg.model);
  auto gviews = grads.params();
  TrainResult result;
  result.checkpoint_path = ckpt_path;

  for (int64_t epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    std::vector<size_t> order = train_indices;
    Rng shuffle_rng(mix64(cfg.seed, kShuffleSalt, epoch));
    shuffle_indices(order, shuffle_rng);
    const int64_t steps = static_cast<int64_t>(order.size()) / cfg.batch;

    for (int64_t s = 0; s < steps; ++s) {
      std::vector<size_t> batch_idx(order.begin() + s * cfg.batch,
                                    order.begin() + (s + 1) * cfg.batch);
      auto batch = load_batch(manifest, batch_idx);
      const uint64_t step_seed = mix64(mix64(cfg.seed, kStepSalt), epoch, s);

      grads.zero_params();
      LossBreakdown loss =
          train_step(model, grads, batch, step_seed, cfg.threads);
      model.prior.aux_loss(&grads.prior);
      if (cfg.clip_norm > 0) Adam<float>::clip_global_norm(gviews, cfg.clip_norm);
      adam.step(params, gviews);
      model.project();

      ++global_step;
      std::fprintf(csv, "%" PRId64 ",%.9g,%.9g,%.9g,%.9g\n", global_step,
                   loss.rate_y_bpp, loss.rate_z_bpp, loss.distortion_mse,
                   loss.total);
      result.final_loss = loss.total;
      if (cfg.log_every > 0 && global_step % cfg.log_every == 0) {
        std::fprintf(stderr,
                     "epoch %" PRId64 " step %" PRId64
                     " rate_y %.4f rate_z %.4f mse %.6f total %.4f\n",
                     epoch, global_step, loss.rate_y_bpp, loss.rate_z_bpp,
                     loss.distortion_mse, loss.total);
      }
    }
    std::fflush(csv);

    EntropyTables tables = build_tables(model.prior);
    TrainState state;
    state.epoch = epoch + 1;
    state.step = global_step;
    state.adam_t = adam.steps_taken();
    state.m = adam.moment1();
    state.v = adam.moment2();
    const std::string tmp = ckpt_path + ".tmp";
    result.digest = save_checkpoint(tmp, model, tables, &state);
    fs::rename(tmp, ckpt_path);
    if (cfg.log_every > 0) {
      std::fprintf(stderr, "epoch %" PRId64 " done, checkpoint %s\n", epoch,
                   ckpt_path.c_str());
    }
  }

  std::fclose(csv);
  result.steps = global_step;
  return result;
}

}  // namespace pdtd
