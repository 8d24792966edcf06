// Copyright 2026 The prunekit Authors. All Rights Reserved.
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

#include "prunekit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace prunekit {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'K', 'C', 'K'};

enum class Tag : std::uint8_t { Linear = 0, Conv = 1, Relu = 2, MaxPool = 3, GlobalAvgPool = 4, Flatten = 5 };

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void indices(const std::vector<Index>& v) {
    put<std::uint64_t>(v.size());
    for (Index i : v) put<std::int64_t>(i);
  }
  void floats(const Tensor& t) { out_.write(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float)); }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    bytes_.assign(std::istreambuf_iterator<char>(in), {});
  }
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw std::runtime_error(path_.string() + ": truncated checkpoint at byte " + std::to_string(pos_));
    }
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  Index dim() {
    const auto v = get<std::int64_t>();
    if (v < 1 || v > (std::int64_t{1} << 40)) fail("bad dimension " + std::to_string(v));
    return v;
  }
  std::vector<Index> indices() {
    const auto n = get<std::uint64_t>();
    need(n * sizeof(std::int64_t));
    std::vector<Index> v(n);
    for (auto& i : v) i = get<std::int64_t>();
    return v;
  }
  Tensor floats(Shape shape) {
    Tensor t(std::move(shape));
    const std::size_t n = static_cast<std::size_t>(t.size()) * sizeof(float);
    need(n);
    std::memcpy(t.data(), bytes_.data() + pos_, n);
    pos_ += n;
    return t;
  }
  bool done() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error(path_.string() + ": " + what + " at byte " + std::to_string(pos_));
  }

 private:
  std::filesystem::path path_;
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

void put_shape(Writer& w, const Shape& s) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
  for (Index d : s) w.put<std::int64_t>(d);
}

Shape get_shape(Reader& r) {
  const auto rank = r.get<std::uint32_t>();
  if (rank == 0 || rank > 8) r.fail("bad rank " + std::to_string(rank));
  Shape s(rank);
  for (auto& d : s) d = r.dim();
  return s;
}

std::vector<Index> iota_indices(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

}  // namespace

Checkpoint make_checkpoint(const Network& net) {
  const FeatureKind kind = net.input_shape.size() == 3 ? FeatureKind::Channel : FeatureKind::Flat;
  const Index features = kind == FeatureKind::Channel ? net.input_shape[0] : shape_size(net.input_shape);
  return {net, net.input_shape, kind, iota_indices(features), {}};
}

Checkpoint make_checkpoint(const ShrunkNetwork& shrunk) {
  return {shrunk.net, shrunk.original_input_shape, shrunk.feature_kind, shrunk.kept_features, shrunk.provenance};
}

Checkpoint make_checkpoint(const Network& net, const Shape& original_input_shape, FeatureKind kind,
                           std::vector<Index> kept_features) {
  return {net, original_input_shape, kind, std::move(kept_features), {}};
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  Writer w(path);
  for (char c : kMagic) w.put(c);
  w.put<std::uint32_t>(kCheckpointVersion);
  put_shape(w, ckpt.net.input_shape);
  put_shape(w, ckpt.original_input_shape);
  w.put<std::uint8_t>(ckpt.feature_kind == FeatureKind::Channel ? 1 : 0);
  w.indices(ckpt.kept_features);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.net.layers.size()));
  for (const auto& layer : ckpt.net.layers) {
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Linear>) {
            w.put(Tag::Linear);
            w.put<std::int64_t>(l.in_features());
            w.put<std::int64_t>(l.out_features());
            w.floats(l.weights);
            w.floats(l.bias);
          } else if constexpr (std::is_same_v<L, Conv>) {
            w.put(Tag::Conv);
            for (Index d : l.weights.shape()) w.put<std::int64_t>(d);
            w.put<std::int64_t>(l.stride);
            w.put<std::int64_t>(l.padding);
            w.floats(l.weights);
            w.floats(l.bias);
          } else if constexpr (std::is_same_v<L, ReLU>) {
            w.put(Tag::Relu);
          } else if constexpr (std::is_same_v<L, MaxPool2d>) {
            w.put(Tag::MaxPool);
            w.put<std::int64_t>(l.kernel);
          } else if constexpr (std::is_same_v<L, GlobalAvgPool>) {
            w.put(Tag::GlobalAvgPool);
          } else {
            w.put(Tag::Flatten);
          }
        },
        layer);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.provenance.size()));
  for (const auto& p : ckpt.provenance) {
    w.put<std::uint64_t>(p.layer_index);
    w.indices(p.kept_inputs);
    w.indices(p.kept_outputs);
  }
  w.finish();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  for (char c : kMagic) {
    if (r.get<char>() != c) r.fail("not a prunekit checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.net.input_shape = get_shape(r);
  ckpt.original_input_shape = get_shape(r);
  const auto kind = r.get<std::uint8_t>();
  if (kind > 1) r.fail("bad feature kind");
  ckpt.feature_kind = kind == 1 ? FeatureKind::Channel : FeatureKind::Flat;
  ckpt.kept_features = r.indices();
  const auto layers = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < layers; ++i) {
    switch (static_cast<Tag>(r.get<std::uint8_t>())) {
      case Tag::Linear: {
        const Index in = r.dim(), out = r.dim();
        Linear l;
        l.weights = r.floats({in, out});
        l.bias = r.floats({out});
        ckpt.net.layers.emplace_back(std::move(l));
        break;
      }
      case Tag::Conv: {
        Shape s(4);
        for (auto& d : s) d = r.dim();
        Conv c;
        c.stride = r.dim();
        c.padding = r.get<std::int64_t>();
        if (c.padding < 0) r.fail("negative padding");
        c.weights = r.floats(s);
        c.bias = r.floats({s[0]});
        ckpt.net.layers.emplace_back(std::move(c));
        break;
      }
      case Tag::Relu:
        ckpt.net.layers.emplace_back(ReLU{});
        break;
      case Tag::MaxPool:
        ckpt.net.layers.emplace_back(MaxPool2d{r.dim()});
        break;
      case Tag::GlobalAvgPool:
        ckpt.net.layers.emplace_back(GlobalAvgPool{});
        break;
      case Tag::Flatten:
        ckpt.net.layers.emplace_back(Flatten{});
        break;
      default:
        r.fail("unknown layer tag");
    }
  }
  const auto prov = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < prov; ++i) {
    LayerProvenance p;
    p.layer_index = r.get<std::uint64_t>();
    p.kept_inputs = r.indices();
    p.kept_outputs = r.indices();
    ckpt.provenance.push_back(std::move(p));
  }
  if (!r.done()) r.fail("trailing bytes");
  infer_shapes(ckpt.net);
  return ckpt;
}

}  // namespace prunekit
