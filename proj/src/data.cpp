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

#include "prunekit/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>

namespace prunekit {

namespace fs = std::filesystem;

Index PixelMask::removed_count() const { return static_cast<Index>(std::count(keep.begin(), keep.end(), false)); }

std::vector<Index> PixelMask::removed() const {
  std::vector<Index> out;
  for (std::size_t j = 0; j < keep.size(); ++j) {
    if (!keep[j]) out.push_back(static_cast<Index>(j));
  }
  return out;
}

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const fs::path& path) {
  if (bytes.size() < offset + 4) {
    throw std::runtime_error(path.string() + ": truncated header at byte offset " + std::to_string(bytes.size()) +
                             " (need " + std::to_string(offset + 4) + " bytes)");
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

void expect_length(const std::vector<std::uint8_t>& bytes, std::size_t expected, const fs::path& path) {
  if (bytes.size() < expected) {
    throw std::runtime_error(path.string() + ": truncated at byte offset " + std::to_string(bytes.size()) +
                             ", expected " + std::to_string(expected) + " bytes");
  }
  if (bytes.size() > expected) {
    throw std::runtime_error(path.string() + ": " + std::to_string(bytes.size() - expected) +
                             " trailing bytes after byte offset " + std::to_string(expected));
  }
}

}  // namespace

Dataset load_mnist_idx(const fs::path& images, const fs::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  const std::uint32_t img_magic = read_be32(img, 0, images);
  if (img_magic != 0x00000803) {
    throw std::runtime_error(images.string() + ": bad magic " + hex(img_magic) + " at byte offset 0, expected 0x00000803");
  }
  const std::uint32_t lab_magic = read_be32(lab, 0, labels);
  if (lab_magic != 0x00000801) {
    throw std::runtime_error(labels.string() + ": bad magic " + hex(lab_magic) + " at byte offset 0, expected 0x00000801");
  }
  const std::size_t count = read_be32(img, 4, images);
  const std::size_t rows = read_be32(img, 8, images);
  const std::size_t cols = read_be32(img, 12, images);
  const std::size_t label_count = read_be32(lab, 4, labels);
  if (label_count != count) {
    throw std::runtime_error(labels.string() + ": " + std::to_string(label_count) + " labels at byte offset 4 for " +
                             std::to_string(count) + " images");
  }
  if (count == 0 || rows == 0 || cols == 0) throw std::runtime_error(images.string() + ": empty IDX tensor");
  expect_length(img, 16 + count * rows * cols, images);
  expect_length(lab, 8 + count, labels);

  Dataset data;
  const auto n = static_cast<Index>(count);
  const auto features = static_cast<Index>(rows * cols);
  data.samples = Tensor(Shape{n, features});
  float* dst = data.samples.data();
  for (std::size_t i = 0; i < count * rows * cols; ++i) dst[i] = static_cast<float>(img[16 + i]) / 255.0f;
  data.labels.resize(count);
  std::int32_t top = 0;
  for (std::size_t i = 0; i < count; ++i) {
    data.labels[i] = lab[8 + i];
    top = std::max(top, data.labels[i]);
  }
  if (top > 9) throw std::runtime_error(labels.string() + ": label above 9");
  data.num_classes = 10;
  data.layout = {FeatureLayout::Kind::Flat, 1, static_cast<Index>(rows), static_cast<Index>(cols)};
  return data;
}

Dataset load_cifar_binary(std::span<const fs::path> paths, CifarVariant variant) {
  constexpr std::size_t kPixels = 3 * 32 * 32;
  const std::size_t label_bytes = variant == CifarVariant::Cifar10 ? 1 : 2;
  const std::size_t record = label_bytes + kPixels;
  const std::int32_t classes = variant == CifarVariant::Cifar10 ? 10 : 100;

  std::vector<std::vector<std::uint8_t>> files;
  std::size_t total = 0;
  for (const auto& p : paths) {
    files.push_back(read_file(p));
    const auto& bytes = files.back();
    if (bytes.empty() || bytes.size() % record != 0) {
      throw std::runtime_error(p.string() + ": size " + std::to_string(bytes.size()) +
                               " is not a multiple of the " + std::to_string(record) + "-byte record (byte offset " +
                               std::to_string(bytes.size() - bytes.size() % record) + ")");
    }
    total += bytes.size() / record;
  }
  if (total == 0) throw std::runtime_error("no CIFAR records given");

  Dataset data;
  data.samples = Tensor(Shape{static_cast<Index>(total), 3, 32, 32});
  data.labels.reserve(total);
  float* dst = data.samples.data();
  for (std::size_t f = 0; f < files.size(); ++f) {
    const auto& bytes = files[f];
    for (std::size_t off = 0; off < bytes.size(); off += record) {
      const std::int32_t label = bytes[off + label_bytes - 1];
      if (label >= classes) {
        throw std::runtime_error(paths[f].string() + ": label " + std::to_string(label) + " at byte offset " +
                                 std::to_string(off + label_bytes - 1));
      }
      data.labels.push_back(label);
      for (std::size_t i = 0; i < kPixels; ++i) *dst++ = static_cast<float>(bytes[off + label_bytes + i]) / 255.0f;
    }
  }
  data.num_classes = classes;
  data.layout = {FeatureLayout::Kind::Chw, 3, 32, 32};
  return data;
}

Dataset to_grayscale(const Dataset& rgb) {
  if (rgb.layout.kind != FeatureLayout::Kind::Chw || rgb.layout.channels != 3) {
    throw std::invalid_argument("grayscale conversion needs a chw dataset with 3 channels");
  }
  const Index n = rgb.size(), area = rgb.layout.height * rgb.layout.width;
  Dataset out{Tensor(Shape{n, area}), rgb.labels, rgb.num_classes,
              {FeatureLayout::Kind::Flat, 1, rgb.layout.height, rgb.layout.width}};
  const float* src = rgb.samples.data();
  float* dst = out.samples.data();
  for (Index s = 0; s < n; ++s) {
    const float* r = src + s * 3 * area;
    const float* g = r + area;
    const float* b = g + area;
    for (Index p = 0; p < area; ++p) {
      dst[s * area + p] = static_cast<float>(0.299 * r[p] + 0.587 * g[p] + 0.114 * b[p]);
    }
  }
  return out;
}

Dataset resize_bilinear(const Dataset& data, Index height, Index width) {
  const auto& lay = data.layout;
  if (lay.kind == FeatureLayout::Kind::Flat && data.features() != lay.height * lay.width) {
    throw std::invalid_argument("cannot resize a dataset whose pixels were masked");
  }
  if (height < 1 || width < 1) throw std::invalid_argument("resize target must be positive");
  const Index n = data.size(), channels = lay.channels;
  const Index in_h = lay.height, in_w = lay.width;
  const Shape shape = lay.kind == FeatureLayout::Kind::Flat ? Shape{n, height * width} : Shape{n, channels, height, width};
  Dataset out{Tensor(shape), data.labels, data.num_classes, {lay.kind, channels, height, width}};

  struct Tap {
    Index lo, hi;
    double frac;
  };
  auto taps = [](Index in, Index out_extent) {
    std::vector<Tap> t(static_cast<std::size_t>(out_extent));
    const double scale = static_cast<double>(in) / static_cast<double>(out_extent);
    for (Index o = 0; o < out_extent; ++o) {
      double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<Index>(std::floor(src));
      t[static_cast<std::size_t>(o)] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
    }
    return t;
  };
  const auto ty = taps(in_h, height);
  const auto tx = taps(in_w, width);
  const float* src = data.samples.data();
  float* dst = out.samples.data();
  for (Index plane = 0; plane < n * channels; ++plane) {
    const float* p = src + plane * in_h * in_w;
    float* q = dst + plane * height * width;
    for (Index y = 0; y < height; ++y) {
      const Tap& a = ty[static_cast<std::size_t>(y)];
      for (Index x = 0; x < width; ++x) {
        const Tap& b = tx[static_cast<std::size_t>(x)];
        const double top = p[a.lo * in_w + b.lo] * (1.0 - b.frac) + p[a.lo * in_w + b.hi] * b.frac;
        const double bottom = p[a.hi * in_w + b.lo] * (1.0 - b.frac) + p[a.hi * in_w + b.hi] * b.frac;
        q[y * width + x] = static_cast<float>(top * (1.0 - a.frac) + bottom * a.frac);
      }
    }
  }
  return out;
}

Dataset subset(const Dataset& data, std::span<const Index> indices) {
  Batch b = gather(data, indices);
  return {std::move(b.inputs), std::move(b.labels), data.num_classes, data.layout};
}

Dataset head(const Dataset& data, Index count) {
  std::vector<Index> idx(static_cast<std::size_t>(std::min(count, data.size())));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Index>(i);
  return subset(data, idx);
}

Batch gather(const Dataset& data, std::span<const Index> indices) {
  if (indices.empty()) throw std::invalid_argument("empty batch");
  const Index features = data.features();
  Shape shape = data.samples.shape();
  shape[0] = static_cast<Index>(indices.size());
  Batch batch{Tensor(shape), {}};
  batch.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Index i = indices[r];
    if (i < 0 || i >= data.size()) throw std::out_of_range("sample index " + std::to_string(i));
    std::copy_n(data.samples.data() + i * features, features, batch.inputs.data() + static_cast<Index>(r) * features);
    batch.labels.push_back(data.labels[static_cast<std::size_t>(i)]);
  }
  return batch;
}

Tensor hflip(const Tensor& batch) {
  if (batch.rank() != 4) throw std::invalid_argument("hflip needs (B,C,H,W)");
  Tensor out(batch.shape());
  const Index rows = batch.dim(0) * batch.dim(1) * batch.dim(2), width = batch.dim(3);
  for (Index r = 0; r < rows; ++r) {
    const float* src = batch.data() + r * width;
    std::reverse_copy(src, src + width, out.data() + r * width);
  }
  return out;
}

Tensor augment(const Tensor& batch, const AugmentPolicy& policy, std::mt19937_64& rng) {
  if (!policy.enabled) return batch;
  if (batch.rank() != 4) throw std::invalid_argument("augmentation needs (B,C,H,W)");
  const Index n = batch.dim(0), channels = batch.dim(1), height = batch.dim(2), width = batch.dim(3);
  const Index pad = policy.crop_padding;
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<Index> shift(0, 2 * pad);
  Tensor out(batch.shape());
  for (Index s = 0; s < n; ++s) {
    const bool flip = policy.horizontal_flip && coin(rng);
    const Index dy = shift(rng) - pad, dx = shift(rng) - pad;
    for (Index c = 0; c < channels; ++c) {
      const float* src = batch.data() + (s * channels + c) * height * width;
      float* dst = out.data() + (s * channels + c) * height * width;
      for (Index y = 0; y < height; ++y) {
        const Index sy = y + dy;
        if (sy < 0 || sy >= height) continue;
        for (Index x = 0; x < width; ++x) {
          const Index sx = x + dx;
          if (sx < 0 || sx >= width) continue;
          dst[y * width + x] = src[sy * width + (flip ? width - 1 - sx : sx)];
        }
      }
    }
  }
  return out;
}

Tensor augment(const Tensor& batch, const AugmentPolicy& policy, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return augment(batch, policy, rng);
}

void write_pgm_mask(const PixelMask& mask, const fs::path& path) {
  if (mask.height < 1 || mask.width < 1 || static_cast<Index>(mask.keep.size()) != mask.height * mask.width) {
    throw std::invalid_argument("invalid pixel mask");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << mask.width << ' ' << mask.height << "\n255\n";
  for (bool k : mask.keep) out.put(static_cast<char>(k ? 0xFF : 0x00));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

PixelMask read_pgm_mask(const fs::path& path) {
  const auto bytes = read_file(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    if (t.empty()) throw std::runtime_error(path.string() + ": truncated PGM header at byte offset " + std::to_string(pos));
    return t;
  };
  if (token() != "P5") throw std::runtime_error(path.string() + ": not a binary PGM (P5)");
  PixelMask mask;
  mask.width = std::stol(token());
  mask.height = std::stol(token());
  if (token() != "255") throw std::runtime_error(path.string() + ": mask PGM must have maxval 255");
  ++pos;  // single whitespace before the raster
  const auto count = static_cast<std::size_t>(mask.width * mask.height);
  if (bytes.size() != pos + count) {
    throw std::runtime_error(path.string() + ": raster size mismatch at byte offset " + std::to_string(pos));
  }
  mask.keep.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = bytes[pos + i];
    if (v != 0 && v != 255) {
      throw std::runtime_error(path.string() + ": value " + std::to_string(v) + " at byte offset " +
                               std::to_string(pos + i) + " is neither 0 nor 255");
    }
    mask.keep[i] = v == 255;
  }
  return mask;
}

}  // namespace prunekit
