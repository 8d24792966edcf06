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

#include "prunekit/feature_trace.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <stdexcept>
#include <string>

namespace prunekit {

PixelMask pixel_mask_from_plan(const RemovalPlan& plan, Index height, Index width) {
  if (plan.feature_kind != FeatureKind::Flat) throw std::invalid_argument("plan removes channels, not pixels");
  if (height < 1 || width < 1 || plan.feature_count != height * width) {
    throw std::invalid_argument("plan covers " + std::to_string(plan.feature_count) + " input features, not " +
                                std::to_string(height) + "x" + std::to_string(width) + " pixels");
  }
  PixelMask mask{height, width, std::vector<bool>(static_cast<std::size_t>(height * width), true)};
  for (Index j : plan.removed_input_features) mask.keep.at(static_cast<std::size_t>(j)) = false;
  return mask;
}

ChannelMask channel_mask_from_plan(const RemovalPlan& plan, Index channels) {
  if (plan.feature_kind != FeatureKind::Channel || plan.feature_count != channels) {
    throw std::invalid_argument("plan does not describe " + std::to_string(channels) + " input channels");
  }
  ChannelMask mask{channels, {}};
  for (Index c = 0; c < channels; ++c) {
    if (!std::binary_search(plan.removed_input_features.begin(), plan.removed_input_features.end(), c)) {
      mask.kept_channels.push_back(c);
    }
  }
  if (mask.kept_channels.empty()) throw std::runtime_error("plan removes every input channel");
  return mask;
}

DataSparsity quantize_data_sparsity(double target, Index channels) {
  if (!(target >= 0.0 && target < 1.0)) throw std::invalid_argument("data sparsity must lie in [0, 1)");
  if (channels < 1) throw std::invalid_argument("need at least one channel");
  // Guard against products such as 0.7 * 10 landing a hair under an integer.
  const double scaled = target * static_cast<double>(channels);
  auto remove = static_cast<Index>(std::floor(scaled + 1e-9));
  remove = std::min(remove, channels - 1);
  return {remove, static_cast<double>(remove) / static_cast<double>(channels)};
}

ChannelMask quantized_channel_mask(const StructureMask& first_layer, double target, Index channels) {
  if (first_layer.granularity != Granularity::ConvSharedKernel || first_layer.size() != channels) {
    throw std::invalid_argument("first-layer mask must be a shared-kernel mask over " + std::to_string(channels) +
                                " channels");
  }
  const Index remove = quantize_data_sparsity(target, channels).channels_to_remove;
  if (static_cast<Index>(first_layer.pruned_order.size()) < remove) {
    throw std::invalid_argument("mask pruned " + std::to_string(first_layer.pruned_order.size()) +
                                " channels, quantized data sparsity needs " + std::to_string(remove));
  }
  std::vector<Index> removed(first_layer.pruned_order.begin(), first_layer.pruned_order.begin() + remove);
  std::sort(removed.begin(), removed.end());
  ChannelMask mask{channels, {}};
  for (Index c = 0; c < channels; ++c) {
    if (!std::binary_search(removed.begin(), removed.end(), c)) mask.kept_channels.push_back(c);
  }
  return mask;
}

namespace {

void check_pixel_mask(const Dataset& data, const PixelMask& mask) {
  if (data.layout.kind != FeatureLayout::Kind::Flat || data.layout.channels != 1 ||
      data.layout.height != mask.height || data.layout.width != mask.width ||
      static_cast<Index>(mask.keep.size()) != mask.height * mask.width) {
    throw std::invalid_argument("pixel mask " + std::to_string(mask.height) + "x" + std::to_string(mask.width) +
                                " does not match dataset");
  }
}

void check_channel_mask(const Dataset& data, const ChannelMask& mask) {
  if (mask.kept_channels.empty() || !std::is_sorted(mask.kept_channels.begin(), mask.kept_channels.end()) ||
      mask.kept_channels.back() >= mask.channels || mask.kept_channels.front() < 0) {
    throw std::invalid_argument("malformed channel mask");
  }
  if (data.layout.kind != FeatureLayout::Kind::Chw) throw std::invalid_argument("channel mask needs a chw dataset");
}

}  // namespace

Dataset apply_feature_mask(const Dataset& data, const PixelMask& mask) {
  check_pixel_mask(data, mask);
  if (data.features() != mask.height * mask.width) throw std::invalid_argument("dataset pixels were already masked");
  std::vector<Index> kept;
  for (std::size_t j = 0; j < mask.keep.size(); ++j) {
    if (mask.keep[j]) kept.push_back(static_cast<Index>(j));
  }
  if (kept.empty()) throw std::invalid_argument("pixel mask removes every pixel");
  const Index n = data.size(), full = data.features(), k = static_cast<Index>(kept.size());
  Dataset out{Tensor(Shape{n, k}), data.labels, data.num_classes, data.layout};
  const auto src = data.samples.matrix(n, full);
  auto dst = out.samples.matrix(n, k);
  for (Index c = 0; c < k; ++c) dst.col(c) = src.col(kept[static_cast<std::size_t>(c)]);
  return out;
}

Dataset apply_feature_mask(const Dataset& data, const ChannelMask& mask) {
  check_channel_mask(data, mask);
  if (data.layout.channels != mask.channels) throw std::invalid_argument("channel mask does not match dataset");
  const Index n = data.size(), area = data.layout.height * data.layout.width;
  const auto k = static_cast<Index>(mask.kept_channels.size());
  Dataset out{Tensor(Shape{n, k, data.layout.height, data.layout.width}), data.labels, data.num_classes, data.layout};
  out.layout.channels = k;
  for (Index s = 0; s < n; ++s) {
    for (Index c = 0; c < k; ++c) {
      const float* src = data.samples.data() + (s * mask.channels + mask.kept_channels[static_cast<std::size_t>(c)]) * area;
      std::copy(src, src + area, out.samples.data() + (s * k + c) * area);
    }
  }
  return out;
}

Dataset restore_features(const Dataset& data, const PixelMask& mask) {
  check_pixel_mask(data, mask);
  const Index n = data.size(), full = mask.height * mask.width, k = mask.kept_count();
  if (data.features() != k) throw std::invalid_argument("dataset does not carry the mask's kept pixels");
  Dataset out{Tensor(Shape{n, full}), data.labels, data.num_classes, data.layout};
  const auto src = data.samples.matrix(n, k);
  auto dst = out.samples.matrix(n, full);
  Index c = 0;
  for (Index j = 0; j < full; ++j) {
    if (mask.keep[static_cast<std::size_t>(j)]) dst.col(j) = src.col(c++);
  }
  return out;
}

Dataset restore_features(const Dataset& data, const ChannelMask& mask) {
  check_channel_mask(data, mask);
  const auto k = static_cast<Index>(mask.kept_channels.size());
  if (data.layout.channels != k) throw std::invalid_argument("dataset does not carry the mask's kept channels");
  const Index n = data.size(), area = data.layout.height * data.layout.width;
  Dataset out{Tensor(Shape{n, mask.channels, data.layout.height, data.layout.width}), data.labels, data.num_classes,
              data.layout};
  out.layout.channels = mask.channels;
  for (Index s = 0; s < n; ++s) {
    for (Index c = 0; c < k; ++c) {
      const float* src = data.samples.data() + (s * k + c) * area;
      std::copy(src, src + area, out.samples.data() + (s * mask.channels + mask.kept_channels[static_cast<std::size_t>(c)]) * area);
    }
  }
  return out;
}

nlohmann::json to_json(const PixelMask& mask) {
  return {{"kind", "pixel"}, {"height", mask.height}, {"width", mask.width}, {"removed", mask.removed()}};
}

nlohmann::json to_json(const ChannelMask& mask) {
  return {{"kind", "channel"}, {"channels", mask.channels}, {"kept_channels", mask.kept_channels}};
}

PixelMask pixel_mask_from_json(const nlohmann::json& j) {
  PixelMask mask;
  mask.height = j.at("height").get<Index>();
  mask.width = j.at("width").get<Index>();
  if (mask.height < 1 || mask.width < 1) throw std::invalid_argument("pixel mask needs positive dimensions");
  mask.keep.assign(static_cast<std::size_t>(mask.height * mask.width), true);
  for (Index r : j.at("removed").get<std::vector<Index>>()) {
    if (r < 0 || r >= mask.height * mask.width) throw std::invalid_argument("removed pixel out of range");
    mask.keep[static_cast<std::size_t>(r)] = false;
  }
  return mask;
}

ChannelMask channel_mask_from_json(const nlohmann::json& j) {
  ChannelMask mask{j.at("channels").get<Index>(), j.at("kept_channels").get<std::vector<Index>>()};
  const auto& k = mask.kept_channels;
  if (k.empty() || std::adjacent_find(k.begin(), k.end(), std::greater_equal<>()) != k.end() || k.front() < 0 ||
      k.back() >= mask.channels) {
    throw std::invalid_argument("kept_channels must be nonempty, strictly ascending and below channels");
  }
  return mask;
}

}  // namespace prunekit
