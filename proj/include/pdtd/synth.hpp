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

#ifndef PDTD_SYNTH_HPP_
#define PDTD_SYNTH_HPP_

#include <cstdint>
#include <string>

#include "pdtd/image.hpp"

namespace pdtd {

// Procedural training/eval imagery: layered gradients, band-limited value
// noise, and soft geometric shapes. Pure function of the seed.
Image8 synth_image(uint64_t seed, int width, int height);

// Writes `count` images named img_00000.png... under dir (created if needed).
void make_synth_dataset(const std::string& dir, int count, int width,
                        int height, uint64_t seed,
                        const std::string& format = "png");

}  // namespace pdtd

#endif  // PDTD_SYNTH_HPP_
