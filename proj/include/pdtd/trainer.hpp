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

#ifndef PDTD_TRAINER_HPP_
#define PDTD_TRAINER_HPP_

#include <cstdint>
#include <string>

#include "pdtd/config.hpp"

namespace pdtd {

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-4;
  int batch = 8;
  int epochs = 20;
  int patch = 128;
  int patches_per_image = 1;
  double val_fraction = 0.0;
  uint64_t seed = 1;
  std::string data_dir;
  std::string out_dir;
  int threads = 0;        // 0 = hardware_concurrency
  double clip_norm = 1.0; // global gradient norm cap
  int log_every = 50;     // stderr progress cadence; <=0 silences
};

struct TrainResult {
  std::string checkpoint_path;
  uint64_t digest = 0;
  double final_loss = 0.0;
  int64_t steps = 0;
};

// Runs (or resumes) the full double-tail-drop training loop. Writes
//   out_dir/manifest.jsonl   ingest result
//   out_dir/metrics.csv      one row per step: step,rate_y_bpp,rate_z_bpp,mse,total
//   out_dir/checkpoint.pdtdc parameters + entropy tables + optimizer state
// Deterministic for a fixed (seed, config, dataset); resume from the latest
// epoch checkpoint continues bit-identically.
TrainResult train(const TrainConfig& cfg);

}  // namespace pdtd

#endif  // PDTD_TRAINER_HPP_
