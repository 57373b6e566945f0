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

#ifndef PDTD_IMAGE_HPP_
#define PDTD_IMAGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pdtd/tensor.hpp"

namespace pdtd {

// Interleaved 8-bit RGB.
struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;

  uint8_t* pixel(int y, int x) { return rgb.data() + (size_t(y) * width + x) * 3; }
  const uint8_t* pixel(int y, int x) const {
    return rgb.data() + (size_t(y) * width + x) * 3;
  }
};

// PNG (any 8/16-bit colortype, converted to RGB8) or binary PPM (P6),
// selected by sniffing the file magic.
Image8 load_image(const std::string& path);
void save_png(const std::string& path, const Image8& img);
void save_ppm(const std::string& path, const Image8& img);
void save_image(const std::string& path, const Image8& img);  // by extension

// Width/height without decoding the pixel payload.
bool probe_image_size(const std::string& path, int* width, int* height);

// [3, H, W] scaled by 1/255.
Tensor<float> image_to_tensor(const Image8& img);
// Clamps to [0,1] and rounds to 8 bits.
Image8 tensor_to_image(const Tensor<float>& t);

Image8 crop(const Image8& img, int x0, int y0, int w, int h);
// Replicates the last row/column up to the next multiple.
Image8 replicate_pad(const Image8& img, int multiple);
Image8 resize_bilinear(const Image8& img, int w, int h);

}  // namespace pdtd

#endif  // PDTD_IMAGE_HPP_
