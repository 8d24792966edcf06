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

#ifndef PRUNEKIT_DATA_HPP
#define PRUNEKIT_DATA_HPP

#include "prunekit/feature_mask.hpp"
#include "prunekit/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

namespace prunekit {

struct FeatureLayout {
  enum class Kind { Flat, Chw };
  Kind kind = Kind::Flat;
  Index channels = 1;
  // Image geometry the features came from. A flat dataset whose pixels were
  // masked keeps the original height/width but carries fewer features.
  Index height = 0;
  Index width = 0;

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;
};

struct Dataset {
  // (N, F) for flat layouts, (N, C, H, W) for chw.
  Tensor samples;
  std::vector<std::int32_t> labels;
  Index num_classes = 0;
  FeatureLayout layout;

  Index size() const { return static_cast<Index>(labels.size()); }
  // Per-sample shape, i.e. samples.shape() without the leading axis.
  Shape sample_shape() const { return Shape(samples.shape().begin() + 1, samples.shape().end()); }
  Index features() const { return samples.size() / samples.dim(0); }
};

// IDX image/label pair (magic 0x00000803 / 0x00000801). Pixels scaled by
// 1/255 into a flat (N, rows*cols) layout. Errors name the byte offset.
Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

enum class CifarVariant { Cifar10, Cifar100 };

// Canonical CIFAR binary batches: one label byte (two for CIFAR-100,
// the fine label is used) then 1024 R, 1024 G, 1024 B bytes.
Dataset load_cifar_binary(std::span<const std::filesystem::path> paths, CifarVariant variant);

// Luma 0.299 R + 0.587 G + 0.114 B; chw with C = 3 in, flat(H, W) out.
Dataset to_grayscale(const Dataset& rgb);

// Bilinear resampling with half-pixel centres, for flat single-channel
// or chw datasets.
Dataset resize_bilinear(const Dataset& data, Index height, Index width);

// Rows `indices` of a dataset, in the given order.
Dataset subset(const Dataset& data, std::span<const Index> indices);
Dataset head(const Dataset& data, Index count);

struct Batch {
  Tensor inputs;
  std::vector<std::int32_t> labels;
};

Batch gather(const Dataset& data, std::span<const Index> indices);

struct AugmentPolicy {
  bool enabled = false;
  bool horizontal_flip = true;
  Index crop_padding = 4;
};

// Per-sample horizontal flip (p = 0.5) then a random crop out of a
// zero-padded copy. Batch must be (B, C, H, W).
Tensor augment(const Tensor& batch, const AugmentPolicy& policy, std::mt19937_64& rng);
Tensor augment(const Tensor& batch, const AugmentPolicy& policy, std::uint64_t seed);

// Mirrors every (C, H, W) sample of a batch left to right.
Tensor hflip(const Tensor& batch);

// Binary PGM (P5, maxval 255): kept pixels 255, removed 0.
void write_pgm_mask(const PixelMask& mask, const std::filesystem::path& path);
PixelMask read_pgm_mask(const std::filesystem::path& path);

}  // namespace prunekit

#endif  // PRUNEKIT_DATA_HPP
