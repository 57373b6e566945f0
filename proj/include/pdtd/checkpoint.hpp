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

#ifndef PDTD_CHECKPOINT_HPP_
#define PDTD_CHECKPOINT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pdtd/model.hpp"
#include "pdtd/tables.hpp"

namespace pdtd {

// Optimizer + progress state so an interrupted run resumes with identical
// dynamics.
struct TrainState {
  int64_t epoch = 0;      // completed epochs
  int64_t step = 0;       // total optimizer steps taken
  int64_t adam_t = 0;
  std::vector<float> m, v;
};

struct Checkpoint {
  HyperpriorModel<float> model;
  EntropyTables tables;
  bool has_train = false;
  TrainState train;
  uint64_t digest = 0;  // fnv1a64 over the payload; doubles as the model id
};

// Single-file binary container (little-endian), versioned, bit-exact on
// round trip. Returns the digest written into the trailer.
uint64_t save_checkpoint(const std::string& path, HyperpriorModel<float>& model,
                         const EntropyTables& tables,
                         const TrainState* train = nullptr);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace pdtd

#endif  // PDTD_CHECKPOINT_HPP_
