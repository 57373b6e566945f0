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

#include "pdtd/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pdtd/rng.hpp"

namespace pdtd {

namespace {

constexpr char kMagic[8] = {'P', 'D', 'T', 'D', 'C', 'K', 'P', '1'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  void raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <typename T>
  void put(T v) {
    raw(&v, sizeof(T));
  }
  void put_floats(const float* p, size_t n) {
    put<uint64_t>(n);
    raw(p, n * sizeof(float));
  }
  std::vector<uint8_t>& bytes() { return buf_; }

 private:
  std::vector<uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<uint8_t> buf) : buf_(std::move(buf)) {}
  void raw(void* p, size_t n) {
    if (pos_ + n > buf_.size()) throw std::runtime_error("checkpoint: truncated");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T get() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  std::vector<float> get_floats() {
    const uint64_t n = get<uint64_t>();
    std::vector<float> v(n);
    raw(v.data(), n * sizeof(float));
    return v;
  }
  size_t pos() const { return pos_; }
  const std::vector<uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<uint8_t> buf_;
  size_t pos_ = 0;
};

void write_row(Writer& w, const CdfRow& row) {
  w.put<int32_t>(row.min_symbol);
  w.put<uint32_t>(static_cast<uint32_t>(row.cdf.size()));
  for (uint32_t v : row.cdf) w.put<uint32_t>(v);
}

CdfRow read_row(Reader& r) {
  CdfRow row;
  row.min_symbol = r.get<int32_t>();
  const uint32_t n = r.get<uint32_t>();
  row.cdf.resize(n);
  for (auto& v : row.cdf) v = r.get<uint32_t>();
  return row;
}

}  // namespace

uint64_t save_checkpoint(const std::string& path, HyperpriorModel<float>& model,
                         const EntropyTables& tables, const TrainState* train) {
  Writer w;
  w.raw(kMagic, 8);
  w.put<uint32_t>(kVersion);

  const ModelConfig& c = model.cfg;
  w.put<int32_t>(c.c_lat);
  w.put<int32_t>(c.c_hp);
  w.put<int32_t>(c.base_width);
  w.put<int32_t>(c.group_size);
  w.put<double>(c.u1);
  w.put<double>(c.u2);
  w.put<double>(c.lambda);

  auto views = model.params();
  w.put<uint32_t>(static_cast<uint32_t>(views.size()));
  for (const auto& v : views) w.put_floats(v.data, v.size);

  w.put<uint32_t>(static_cast<uint32_t>(tables.scale_table.size()));
  for (double s : tables.scale_table) w.put<double>(s);
  w.put<uint32_t>(static_cast<uint32_t>(tables.gaussian.size()));
  for (const auto& row : tables.gaussian) write_row(w, row);
  w.put<uint32_t>(static_cast<uint32_t>(tables.factorized.size()));
  for (const auto& row : tables.factorized) write_row(w, row);

  w.put<uint8_t>(train ? 1 : 0);
  if (train) {
    w.put<int64_t>(train->epoch);
    w.put<int64_t>(train->step);
    w.put<int64_t>(train->adam_t);
    w.put_floats(train->m.data(), train->m.size());
    w.put_floats(train->v.data(), train->v.size());
  }

  const uint64_t digest = fnv1a64(w.bytes().data() + 8, w.bytes().size() - 8);
  w.put<uint64_t>(digest);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(reinterpret_cast<const char*>(w.bytes().data()),
          static_cast<std::streamsize>(w.bytes().size()));
  if (!f) throw std::runtime_error("save_checkpoint: write failed: " + path);
  return digest;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());
  if (buf.size() < 8 + 4 + 8 || std::memcmp(buf.data(), kMagic, 8) != 0) {
    throw std::runtime_error("load_checkpoint: not a checkpoint: " + path);
  }
  uint64_t stored_digest;
  std::memcpy(&stored_digest, buf.data() + buf.size() - 8, 8);
  const uint64_t digest = fnv1a64(buf.data() + 8, buf.size() - 8 - 8);
  if (digest != stored_digest) {
    throw std::runtime_error("load_checkpoint: digest mismatch (corrupt file): " +
                             path);
  }

  Reader r(std::move(buf));
  char magic[8];
  r.raw(magic, 8);
  if (r.get<uint32_t>() != kVersion) {
    throw std::runtime_error("load_checkpoint: unsupported version: " + path);
  }

  ModelConfig c;
  c.c_lat = r.get<int32_t>();
  c.c_hp = r.get<int32_t>();
  c.base_width = r.get<int32_t>();
  c.group_size = r.get<int32_t>();
  c.u1 = r.get<double>();
  c.u2 = r.get<double>();
  c.lambda = r.get<double>();

  Checkpoint ckpt;
  ckpt.model = HyperpriorModel<float>(c);
  auto views = ckpt.model.params();
  const uint32_t n_views = r.get<uint32_t>();
  if (n_views != views.size()) {
    throw std::runtime_error("load_checkpoint: parameter layout mismatch");
  }
  for (auto& v : views) {
    auto data = r.get_floats();
    if (data.size() != v.size) {
      throw std::runtime_error("load_checkpoint: parameter size mismatch");
    }
    std::copy(data.begin(), data.end(), v.data);
  }

  ckpt.tables.scale_table.resize(r.get<uint32_t>());
  for (auto& s : ckpt.tables.scale_table) s = r.get<double>();
  ckpt.tables.gaussian.resize(r.get<uint32_t>());
  for (auto& row : ckpt.tables.gaussian) row = read_row(r);
  ckpt.tables.factorized.resize(r.get<uint32_t>());
  for (auto& row : ckpt.tables.factorized) row = read_row(r);

  if (r.get<uint8_t>() == 1) {
    ckpt.has_train = true;
    ckpt.train.epoch = r.get<int64_t>();
    ckpt.train.step = r.get<int64_t>();
    ckpt.train.adam_t = r.get<int64_t>();
    ckpt.train.m = r.get_floats();
    ckpt.train.v = r.get_floats();
  }
  ckpt.digest = digest;
  return ckpt;
}

}  // namespace pdtd
