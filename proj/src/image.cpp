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

#include "pdtd/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace pdtd {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

Image8 load_png(const std::string& path) {
  File fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("load_png: cannot open " + path);
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("load_png: png_create_read_struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("load_png: png_create_info_struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_png: decode failed for " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  // Normalize every colortype/bit depth to 8-bit RGB.
  png_set_expand(png);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_ALPHA) {
    png_set_strip_alpha(png);
  }
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);

  Image8 img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  if (png_get_rowbytes(png, info) != static_cast<size_t>(img.width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("load_png: unexpected row size in " + path);
  }
  img.rgb.resize(static_cast<size_t>(img.width) * img.height * 3);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.pixel(y, 0);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

Image8 load_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_ppm: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P6") throw std::runtime_error("load_ppm: not a P6 file: " + path);
  auto next_int = [&]() {
    while (true) {
      int c = f.peek();
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(c)) {
        f.get();
      } else {
        break;
      }
    }
    int v;
    f >> v;
    return v;
  };
  Image8 img;
  img.width = next_int();
  img.height = next_int();
  const int maxval = next_int();
  if (img.width <= 0 || img.height <= 0 || maxval != 255) {
    throw std::runtime_error("load_ppm: unsupported header in " + path);
  }
  f.get();  // single whitespace after maxval
  img.rgb.resize(static_cast<size_t>(img.width) * img.height * 3);
  f.read(reinterpret_cast<char*>(img.rgb.data()),
         static_cast<std::streamsize>(img.rgb.size()));
  if (!f) throw std::runtime_error("load_ppm: truncated " + path);
  return img;
}

}  // namespace

Image8 load_image(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_image: cannot open " + path);
  unsigned char magic[8] = {0};
  f.read(reinterpret_cast<char*>(magic), 8);
  f.close();
  if (png_sig_cmp(magic, 0, 8) == 0) return load_png(path);
  if (magic[0] == 'P' && magic[1] == '6') return load_ppm(path);
  throw std::runtime_error("load_image: unsupported format: " + path);
}

void save_png(const std::string& path, const Image8& img) {
  File fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("save_png: cannot open " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("save_png: png_create_write_struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("save_png: png_create_info_struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("save_png: encode failed for " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(img.pixel(y, 0));
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_ppm(const std::string& path, const Image8& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_ppm: cannot open " + path);
  f << "P6\n" << img.width << " " << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
}

void save_image(const std::string& path, const Image8& img) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".ppm") {
    save_ppm(path, img);
  } else {
    save_png(path, img);
  }
}

bool probe_image_size(const std::string& path, int* width, int* height) {
  try {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    unsigned char magic[8] = {0};
    f.read(reinterpret_cast<char*>(magic), 8);
    if (magic[0] == 'P' && magic[1] == '6') {
      f.close();
      Image8 probe = load_ppm(path);
      *width = probe.width;
      *height = probe.height;
      return true;
    }
    if (png_sig_cmp(magic, 0, 8) != 0) return false;
    // IHDR is always the first chunk: dims sit at byte 16.
    f.seekg(16);
    unsigned char dims[8];
    f.read(reinterpret_cast<char*>(dims), 8);
    if (!f) return false;
    *width = (dims[0] << 24) | (dims[1] << 16) | (dims[2] << 8) | dims[3];
    *height = (dims[4] << 24) | (dims[5] << 16) | (dims[6] << 8) | dims[7];
    return *width > 0 && *height > 0;
  } catch (const std::exception&) {
    return false;
  }
}

Tensor<float> image_to_tensor(const Image8& img) {
  Tensor<float> t(3, img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const uint8_t* p = img.pixel(y, x);
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = p[c] / 255.0f;
    }
  }
  return t;
}

Image8 tensor_to_image(const Tensor<float>& t) {
  if (t.channels() != 3) {
    throw std::invalid_argument("tensor_to_image: need 3 channels");
  }
  Image8 img;
  img.width = t.width();
  img.height = t.height();
  img.rgb.resize(static_cast<size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      uint8_t* p = img.pixel(y, x);
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(t.at(c, y, x), 0.0f, 1.0f);
        p[c] = static_cast<uint8_t>(std::lround(v * 255.0f));
      }
    }
  }
  return img;
}

Image8 crop(const Image8& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || x0 + w > img.width || y0 + h > img.height) {
    throw std::invalid_argument("crop: window out of bounds");
  }
  Image8 out;
  out.width = w;
  out.height = h;
  out.rgb.resize(static_cast<size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    std::memcpy(out.pixel(y, 0), img.pixel(y0 + y, x0), static_cast<size_t>(w) * 3);
  }
  return out;
}

Image8 resize_bilinear(const Image8& img, int w, int h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("resize_bilinear: bad dims");
  Image8 out;
  out.width = w;
  out.height = h;
  out.rgb.resize(static_cast<size_t>(w) * h * 3);
  const double sx = static_cast<double>(img.width) / w;
  const double sy = static_cast<double>(img.height) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, img.height - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = std::clamp(fy - y0, 0.0, 1.0);
    for (int x = 0; x < w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, img.width - 1);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = std::clamp(fx - x0, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        const double top = img.pixel(y0, x0)[c] * (1 - wx) + img.pixel(y0, x1)[c] * wx;
        const double bot = img.pixel(y1, x0)[c] * (1 - wx) + img.pixel(y1, x1)[c] * wx;
        out.pixel(y, x)[c] =
            static_cast<uint8_t>(std::lround(top * (1 - wy) + bot * wy));
      }
    }
  }
  return out;
}

Image8 replicate_pad(const Image8& img, int multiple) {
  const int w = (img.width + multiple - 1) / multiple * multiple;
  const int h = (img.height + multiple - 1) / multiple * multiple;
  if (w == img.width && h == img.height) return img;
  Image8 out;
  out.width = w;
  out.height = h;
  out.rgb.resize(static_cast<size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(y, img.height - 1);
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(x, img.width - 1);
      std::memcpy(out.pixel(y, x), img.pixel(sy, sx), 3);
    }
  }
  return out;
}

}  // namespace pdtd
