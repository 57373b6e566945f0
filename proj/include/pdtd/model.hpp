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

#ifndef PDTD_MODEL_HPP_
#define PDTD_MODEL_HPP_

#include <cstdint>
#include <vector>

#include "pdtd/config.hpp"
#include "pdtd/factorized.hpp"
#include "pdtd/transforms.hpp"

namespace pdtd {

// The full parameter set: the four transforms plus the factorized prior.
// Gradient accumulators are just a second instance of this struct; params()
// returns views in a fixed order shared by both.
template <typename T>
struct HyperpriorModel {
  ModelConfig cfg;
  AnalysisTransform<T> ga;
  SynthesisTransform<T> gs;
  HyperAnalysisTransform<T> ha;
  HyperSynthesisTransform<T> hs;
  FactorizedPrior<T> prior;

  HyperpriorModel() = default;
  explicit HyperpriorModel(const ModelConfig& c)
      : cfg(c), ga(c), gs(c), ha(c), hs(c), prior(c.c_hp) {
    cfg.validate();
  }

  void init_params(uint64_t seed) {
    Rng r_ga(mix64(seed, 0x67615f696e697400ULL));
    Rng r_gs(mix64(seed, 0x67735f696e697400ULL));
    Rng r_ha(mix64(seed, 0x68615f696e697400ULL));
    Rng r_hs(mix64(seed, 0x68735f696e697400ULL));
    Rng r_pr(mix64(seed, 0x70725f696e697400ULL));
    ga.init_params(r_ga);
    gs.init_params(r_gs);
    ha.init_params(r_ha);
    hs.init_params(r_hs);
    prior.init_params(r_pr);
  }

  std::vector<ParamView<T>> params() {
    std::vector<ParamView<T>> out;
    ga.collect(out);
    gs.collect(out);
    ha.collect(out);
    hs.collect(out);
    prior.collect(out);
    return out;
  }

  size_t param_count() {
    size_t n = 0;
    for (const auto& v : params()) n += v.size;
    return n;
  }

  void zero_params() {
    for (auto& v : params()) std::fill(v.data, v.data + v.size, T(0));
  }

  // Parameter floors after each optimizer step (GDN beta/gamma).
  void project() {
    ga.project();
    gs.project();
  }
};

}  // namespace pdtd

#endif  // PDTD_MODEL_HPP_
