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

#ifndef PDTD_TRANSFORMS_HPP_
#define PDTD_TRANSFORMS_HPP_

#include <vector>

#include "pdtd/config.hpp"
#include "pdtd/layers.hpp"

namespace pdtd {

// Scale floor of the conditional Gaussian; the hyper synthesis output
// activation maps into (kSigmaMin, inf) and the coder's scale table starts
// here, so likelihoods and CDF rows stay finite.
constexpr double kSigmaMin = 0.11;

// Analysis transform g_a: four stride-2 convolutions, GDN after all but the
// last. Input [3, H, W] with H, W divisible by 16; output [c_lat, H/16, W/16].
template <typename T>
class AnalysisTransform {
 public:
  struct Trace {
    Tensor<T> x0, g1, x1, g2, x2, g3, x3;  // conv inputs / gdn inputs
  };

  AnalysisTransform() = default;
  explicit AnalysisTransform(const ModelConfig& cfg)
      : conv1_(3, cfg.base_width, 5, 2, 2),
        conv2_(cfg.base_width, cfg.base_width, 5, 2, 2),
        conv3_(cfg.base_width, cfg.base_width, 5, 2, 2),
        conv4_(cfg.base_width, cfg.c_lat, 5, 2, 2),
        gdn1_(cfg.base_width, false),
        gdn2_(cfg.base_width, false),
        gdn3_(cfg.base_width, false) {}

  void init_params(Rng& rng) {
    conv1_.init_params(rng);
    conv2_.init_params(rng);
    conv3_.init_params(rng);
    conv4_.init_params(rng);
  }

  Tensor<T> forward(const Tensor<T>& x, Scratch<T>& s, Trace* tr = nullptr) const {
    if (x.channels() != 3) {
      throw std::invalid_argument("analysis: expected 3 channels, got " +
                                  x.shape_str());
    }
    check_divisible(x.height(), x.width(), "analysis");
    Tensor<T> a = conv1_.forward(x, s);
    Tensor<T> b = gdn1_.forward(a, s);
    Tensor<T> c = conv2_.forward(b, s);
    Tensor<T> d = gdn2_.forward(c, s);
    Tensor<T> e = conv3_.forward(d, s);
    Tensor<T> f = gdn3_.forward(e, s);
    Tensor<T> y = conv4_.forward(f, s);
    if (tr) {
      tr->x0 = x;
      tr->g1 = std::move(a);
      tr->x1 = std::move(b);
      tr->g2 = std::move(c);
      tr->x2 = std::move(d);
      tr->g3 = std::move(e);
      tr->x3 = std::move(f);
    }
    return y;
  }

  Tensor<T> backward(const Trace& tr, const Tensor<T>& gy,
                     AnalysisTransform<T>& grad, Scratch<T>& s) const {
    Tensor<T> g = conv4_.backward(tr.x3, gy, grad.conv4_, s);
    g = gdn3_.backward(tr.g3, g, grad.gdn3_, s);
    g = conv3_.backward(tr.x2, g, grad.conv3_, s);
    g = gdn2_.backward(tr.g2, g, grad.gdn2_, s);
    g = conv2_.backward(tr.x1, g, grad.conv2_, s);
    g = gdn1_.backward(tr.g1, g, grad.gdn1_, s);
    return conv1_.backward(tr.x0, g, grad.conv1_, s);
  }

  void collect(std::vector<ParamView<T>>& out) {
    conv1_.collect(out);
    conv2_.collect(out);
    conv3_.collect(out);
    conv4_.collect(out);
    gdn1_.collect(out);
    gdn2_.collect(out);
    gdn3_.collect(out);
  }
  void project() {
    gdn1_.project();
    gdn2_.project();
    gdn3_.project();
  }

 private:
  Conv2d<T> conv1_, conv2_, conv3_, conv4_;
  Gdn<T> gdn1_, gdn2_, gdn3_;
};

// Synthesis transform g_s: four stride-2 transposed convolutions with IGDN
// between. [c_lat, M, M] -> [3, 16M, 16M]. No output clamping here; the
// evaluation path clamps to [0,1], the training loss does not.
template <typename T>
class SynthesisTransform {
 public:
  struct Trace {
    Tensor<T> y0, g1, x1, g2, x2, g3, x3;
  };

  SynthesisTransform() = default;
  explicit SynthesisTransform(const ModelConfig& cfg)
      : dec1_(cfg.c_lat, cfg.base_width, 5, 2, 2, 1),
        dec2_(cfg.base_width, cfg.base_width, 5, 2, 2, 1),
        dec3_(cfg.base_width, cfg.base_width, 5, 2, 2, 1),
        dec4_(cfg.base_width, 3, 5, 2, 2, 1),
        igdn1_(cfg.base_width, true),
        igdn2_(cfg.base_width, true),
        igdn3_(cfg.base_width, true) {}

  void init_params(Rng& rng) {
    dec1_.init_params(rng);
    dec2_.init_params(rng);
    dec3_.init_params(rng);
    dec4_.init_params(rng);
  }

  Tensor<T> forward(const Tensor<T>& y, Scratch<T>& s, Trace* tr = nullptr) const {
    Tensor<T> a = dec1_.forward(y, s);
    Tensor<T> b = igdn1_.forward(a, s);
    Tensor<T> c = dec2_.forward(b, s);
    Tensor<T> d = igdn2_.forward(c, s);
    Tensor<T> e = dec3_.forward(d, s);
    Tensor<T> f = igdn3_.forward(e, s);
    Tensor<T> x = dec4_.forward(f, s);
    if (tr) {
      tr->y0 = y;
      tr->g1 = std::move(a);
      tr->x1 = std::move(b);
      tr->g2 = std::move(c);
      tr->x2 = std::move(d);
      tr->g3 = std::move(e);
      tr->x3 = std::move(f);
    }
    return x;
  }

  Tensor<T> backward(const Trace& tr, const Tensor<T>& gx,
                     SynthesisTransform<T>& grad, Scratch<T>& s) const {
    Tensor<T> g = dec4_.backward(tr.x3, gx, grad.dec4_, s);
    g = igdn3_.backward(tr.g3, g, grad.igdn3_, s);
    g = dec3_.backward(tr.x2, g, grad.dec3_, s);
    g = igdn2_.backward(tr.g2, g, grad.igdn2_, s);
    g = dec2_.backward(tr.x1, g, grad.dec2_, s);
    g = igdn1_.backward(tr.g1, g, grad.igdn1_, s);
    return dec1_.backward(tr.y0, g, grad.dec1_, s);
  }

  void collect(std::vector<ParamView<T>>& out) {
    dec1_.collect(out);
    dec2_.collect(out);
    dec3_.collect(out);
    dec4_.collect(out);
    igdn1_.collect(out);
    igdn2_.collect(out);
    igdn3_.collect(out);
  }
  void project() {
    igdn1_.project();
    igdn2_.project();
    igdn3_.project();
  }

 private:
  ConvTranspose2d<T> dec1_, dec2_, dec3_, dec4_;
  Gdn<T> igdn1_, igdn2_, igdn3_;
};

// Hyper analysis h_a: works on |y|, one stride-1 stage then two stride-2
// stages with ReLU between. [c_lat, M, M] -> [c_hp, M/4, M/4].
template <typename T>
class HyperAnalysisTransform {
 public:
  struct Trace {
    Tensor<T> y0, a0, r1, a1, r2;  // raw input, |y|, conv2 input (pre-relu), ...
  };

  HyperAnalysisTransform() = default;
  explicit HyperAnalysisTransform(const ModelConfig& cfg)
      : conv1_(cfg.c_lat, cfg.base_width, 3, 1, 1),
        conv2_(cfg.base_width, cfg.base_width, 5, 2, 2),
        conv3_(cfg.base_width, cfg.c_hp, 5, 2, 2) {}

  void init_params(Rng& rng) {
    conv1_.init_params(rng);
    conv2_.init_params(rng);
    conv3_.init_params(rng);
  }

  Tensor<T> forward(const Tensor<T>& y, Scratch<T>& s, Trace* tr = nullptr) const {
    Tensor<T> a = abs_forward(y);
    Tensor<T> b = conv1_.forward(a, s);
    Tensor<T> c = relu(b);
    Tensor<T> d = conv2_.forward(c, s);
    Tensor<T> e = relu(d);
    Tensor<T> z = conv3_.forward(e, s);
    if (tr) {
      tr->y0 = y;
      tr->a0 = std::move(a);
      tr->r1 = std::move(b);
      tr->a1 = std::move(c);
      tr->r2 = std::move(d);
    }
    return z;
  }

  Tensor<T> backward(const Trace& tr, const Tensor<T>& gz,
                     HyperAnalysisTransform<T>& grad, Scratch<T>& s) const {
    Tensor<T> e = relu(tr.r2);
    Tensor<T> g = conv3_.backward(e, gz, grad.conv3_, s);
    g = relu_backward(tr.r2, g);
    g = conv2_.backward(tr.a1, g, grad.conv2_, s);
    g = relu_backward(tr.r1, g);
    g = conv1_.backward(tr.a0, g, grad.conv1_, s);
    return abs_backward(tr.y0, g);
  }

  void collect(std::vector<ParamView<T>>& out) {
    conv1_.collect(out);
    conv2_.collect(out);
    conv3_.collect(out);
  }
  void project() {}

 private:
  Conv2d<T> conv1_, conv2_, conv3_;
};

// Hyper synthesis h_s: mirror of h_a; the final activation is
// sigma = kSigmaMin + softplus(u), strictly above the scale floor.
// [c_hp, M/4, M/4] -> sigma [c_lat, M, M].
template <typename T>
class HyperSynthesisTransform {
 public:
  struct Trace {
    Tensor<T> z0, r1, a1, r2, a2, u;  // u = pre-activation of the floor map
  };

  HyperSynthesisTransform() = default;
  explicit HyperSynthesisTransform(const ModelConfig& cfg)
      : dec1_(cfg.c_hp, cfg.base_width, 5, 2, 2, 1),
        dec2_(cfg.base_width, cfg.base_width, 5, 2, 2, 1),
        conv3_(cfg.base_width, cfg.c_lat, 3, 1, 1) {}

  void init_params(Rng& rng) {
    dec1_.init_params(rng);
    dec2_.init_params(rng);
    conv3_.init_params(rng);
  }

  Tensor<T> forward(const Tensor<T>& z, Scratch<T>& s, Trace* tr = nullptr) const {
    Tensor<T> a = dec1_.forward(z, s);
    Tensor<T> b = relu(a);
    Tensor<T> c = dec2_.forward(b, s);
    Tensor<T> d = relu(c);
    Tensor<T> u = conv3_.forward(d, s);
    Tensor<T> sigma(u.channels(), u.height(), u.width());
    for (size_t i = 0; i < u.size(); ++i) {
      sigma[i] = T(kSigmaMin) + softplus(u[i]);
    }
    if (tr) {
      tr->z0 = z;
      tr->r1 = std::move(a);
      tr->a1 = std::move(b);
      tr->r2 = std::move(c);
      tr->a2 = std::move(d);
      tr->u = std::move(u);
    }
    return sigma;
  }

  Tensor<T> backward(const Trace& tr, const Tensor<T>& gsigma,
                     HyperSynthesisTransform<T>& grad, Scratch<T>& s) const {
    Tensor<T> gu(tr.u.channels(), tr.u.height(), tr.u.width());
    for (size_t i = 0; i < tr.u.size(); ++i) {
      gu[i] = gsigma[i] * sigmoid(tr.u[i]);
    }
    Tensor<T> g = conv3_.backward(tr.a2, gu, grad.conv3_, s);
    g = relu_backward(tr.r2, g);
    g = dec2_.backward(tr.a1, g, grad.dec2_, s);
    g = relu_backward(tr.r1, g);
    return dec1_.backward(tr.z0, g, grad.dec1_, s);
  }

  void collect(std::vector<ParamView<T>>& out) {
    dec1_.collect(out);
    dec2_.collect(out);
    conv3_.collect(out);
  }
  void project() {}

 private:
  ConvTranspose2d<T> dec1_, dec2_;
  Conv2d<T> conv3_;
};

}  // namespace pdtd

#endif  // PDTD_TRANSFORMS_HPP_
