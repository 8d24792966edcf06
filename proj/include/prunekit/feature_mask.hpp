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

#ifndef PRUNEKIT_FEATURE_MASK_HPP
#define PRUNEKIT_FEATURE_MASK_HPP

#include "prunekit/tensor.hpp"

#include <vector>

namespace prunekit {

// Which pixels of a single-channel H x W image survive. keep is row-major:
// entry y * width + x is pixel (y, x) and first-layer input structure y * W + x.
struct PixelMask {
  Index height = 0;
  Index width = 0;
  std::vector<bool> keep;

  bool at(Index y, Index x) const { return keep.at(static_cast<std::size_t>(y * width + x)); }
  Index removed_count() const;
  Index kept_count() const { return static_cast<Index>(keep.size()) - removed_count(); }
  // Flattened indices of removed pixels, ascending.
  std::vector<Index> removed() const;

  friend bool operator==(const PixelMask&, const PixelMask&) = default;
};

// Surviving input channels out of `channels`, ascending.
struct ChannelMask {
  Index channels = 3;
  std::vector<Index> kept_channels;

  friend bool operator==(const ChannelMask&, const ChannelMask&) = default;
};

}  // namespace prunekit

#endif  // PRUNEKIT_FEATURE_MASK_HPP
