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

#include "pdtd/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "json.hpp"
#include "pdtd/image.hpp"
#include "pdtd/rng.hpp"

namespace pdtd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool has_image_extension(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm";
}

// Split decision depends only on the path string, so re-ingesting the same
// tree (in any scan order or with new files added) never moves an existing
// file across the split.
bool is_val(const std::string& path, double val_fraction) {
  const uint64_t h = fnv1a64(path);
  return (h % 1000000) < static_cast<uint64_t>(val_fraction * 1000000.0);
}

}  // namespace

Manifest ingest(const std::string& root_dir, const PatchSpec& spec) {
  if (spec.patch_size % 64 != 0) {
    throw std::invalid_argument("ingest: patch_size must be divisible by 64");
  }
  if (!fs::exists(root_dir)) {
    throw std::runtime_error("ingest: no such directory: " + root_dir);
  }
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root_dir)) {
    if (e.is_regular_file() && has_image_extension(e.path())) {
      files.push_back(e.path().string());
    }
  }
  std::sort(files.begin(), files.end());

  Manifest m;
  m.spec = spec;
  for (const auto& f : files) {
    int w = 0, h = 0;
    if (!probe_image_size(f, &w, &h)) {
      std::cerr << "ingest: cannot read " << f << ", skipping\n";
      continue;
    }
    if (w < spec.patch_size || h < spec.patch_size) {
      ++m.skipped_small;
      continue;
    }
    // Crop draws are keyed on (split_seed, path), not scan order.
    Rng rng(mix64(spec.split_seed, fnv1a64(f)));
    const bool val = is_val(f, spec.val_fraction);
    for (int i = 0; i < spec.patches_per_image; ++i) {
      ManifestEntry e;
      e.path = f;
      e.x0 = static_cast<int>(rng.next_below(w - spec.patch_size + 1));
      e.y0 = static_cast<int>(rng.next_below(h - spec.patch_size + 1));
      e.val = val;
      m.entries.push_back(std::move(e));
    }
  }
  if (m.entries.empty()) {
    throw std::runtime_error("ingest: no usable images under " + root_dir);
  }
  return m;
}

void save_manifest(const std::string& path, const Manifest& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_manifest: cannot open " + path);
  for (const auto& e : m.entries) {
    json j;
    j["path"] = e.path;
    j["x0"] = e.x0;
    j["y0"] = e.y0;
    j["split"] = e.val ? "val" : "train";
    f << j.dump() << "\n";
  }
}

Manifest load_manifest(const std::string& path, const PatchSpec& spec) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_manifest: cannot open " + path);
  Manifest m;
  m.spec = spec;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ManifestEntry e;
    e.path = j.at("path").get<std::string>();
    e.x0 = j.at("x0").get<int>();
    e.y0 = j.at("y0").get<int>();
    e.val = j.at("split").get<std::string>() == "val";
    m.entries.push_back(std::move(e));
  }
  return m;
}

Tensor<float> load_patch(const Manifest& m, size_t index) {
  const int ps = m.spec.patch_size;
  for (size_t attempt = 0; attempt < m.entries.size(); ++attempt) {
    const auto& e = m.entries[(index + attempt) % m.entries.size()];
    try {
      Image8 img = load_image(e.path);
      return image_to_tensor(crop(img, e.x0, e.y0, ps, ps));
    } catch (const std::exception& ex) {
      std::cerr << "load_patch: " << ex.what() << ", substituting next entry\n";
    }
  }
  throw std::runtime_error("load_patch: no decodable entries in manifest");
}

std::vector<Tensor<float>> load_batch(const Manifest& m,
                                      const std::vector<size_t>& indices) {
  std::vector<Tensor<float>> batch;
  batch.reserve(indices.size());
  for (size_t i : indices) batch.push_back(load_patch(m, i));
  return batch;
}

}  // namespace pdtd
