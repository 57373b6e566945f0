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

#ifndef PDTD_TENSOR_HPP_
#define PDTD_TENSOR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdtd {

// Dense channel-major [C, H, W] array. Row (W) is the contiguous axis.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int c, int h, int w)
      : c_(c), h_(h), w_(w),
        data_(static_cast<size_t>(c) * h * w, T(0)) {
    if (c < 0 || h < 0 || w < 0) throw std::invalid_argument("Tensor: negative dim");
  }

  int channels() const { return c_; }
  int height() const { return h_; }
  int width() const { return w_; }
  int plane() const { return h_ * w_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* channel(int c) { return data_.data() + static_cast<size_t>(c) * plane(); }
  const T* channel(int c) const {
    return data_.data() + static_cast<size_t>(c) * plane();
  }

  T& at(int c, int y, int x) {
    return data_[(static_cast<size_t>(c) * h_ + y) * w_ + x];
  }
  T at(int c, int y, int x) const {
    return data_[(static_cast<size_t>(c) * h_ + y) * w_ + x];
  }
  T& operator[](size_t i) { return data_[i]; }
  T operator[](size_t i) const { return data_[i]; }

  void fill(T v) { data_.assign(data_.size(), v); }

  bool same_shape(const Tensor& o) const {
    return c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }
  std::string shape_str() const {
    return "[" + std::to_string(c_) + "," + std::to_string(h_) + "," +
           std::to_string(w_) + "]";
  }

 private:
  int c_ = 0, h_ = 0, w_ = 0;
  std::vector<T> data_;
};

template <typename T>
void check_shape(const Tensor<T>& t, int c, int h, int w, const char* who) {
  if (t.channels() != c || t.height() != h || t.width() != w) {
    throw std::invalid_argument(std::string(who) + ": expected [" +
                                std::to_string(c) + "," + std::to_string(h) +
                                "," + std::to_string(w) + "], got " +
                                t.shape_str());
  }
}

}  // namespace pdtd

#endif  // PDTD_TENSOR_HPP_
