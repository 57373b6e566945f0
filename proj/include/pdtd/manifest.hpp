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

#ifndef PDTD_MANIFEST_HPP_
#define PDTD_MANIFEST_HPP_

#include <string>
#include <vector>

#include "pdtd/tensor.hpp"

namespace pdtd {

struct PatchSpec {
  int patch_size = 128;       // must be divisible by 64
  int patches_per_image = 1;  // random crops drawn per source image
  uint64_t split_seed = 1;    // seeds the crop draws
  double val_fraction = 0.1;  // hash-of-path split
};

struct ManifestEntry {
  std::string path;
  int x0 = 0;
  int y0 = 0;
  bool val = false;
};

struct Manifest {
  PatchSpec spec;
  std::vector<ManifestEntry> entries;
  int skipped_small = 0;

  std::vector<size_t> split_indices(bool val) const {
    std::vector<size_t> idx;
    for (size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].val == val) idx.push_back(i);
    }
    return idx;
  }
};

// Recursive scan of decodable images (.png, .ppm), seeded random crop
// offsets, stable hash-of-path train/val split. Images smaller than the
// patch are counted and skipped. Throws when nothing usable is found.
Manifest ingest(const std::string& root_dir, const PatchSpec& spec);

// One JSON record per line: {"path":..., "x0":..., "y0":..., "split":...}.
void save_manifest(const std::string& path, const Manifest& m);
Manifest load_manifest(const std::string& path, const PatchSpec& spec);

// Decoded, cropped, channel-first, scaled to [0,1]. A failed decode warns
// and substitutes the next manifest entry.
Tensor<float> load_patch(const Manifest& m, size_t index);
std::vector<Tensor<float>> load_batch(const Manifest& m,
                                      const std::vector<size_t>& indices);

}  // namespace pdtd

#endif  // PDTD_MANIFEST_HPP_
