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

#ifndef PRUNEKIT_FEATURE_TRACE_HPP
#define PRUNEKIT_FEATURE_TRACE_HPP

#include "prunekit/data.hpp"
#include "prunekit/feature_mask.hpp"
#include "prunekit/sparsity.hpp"
#include "prunekit/surgery.hpp"

#include "json.hpp"

namespace prunekit {

// keep[y][x] is false iff y * width + x is a removed input feature.
PixelMask pixel_mask_from_plan(const RemovalPlan& plan, Index height, Index width);

// Channels the plan leaves in place. Throws if none survive.
ChannelMask channel_mask_from_plan(const RemovalPlan& plan, Index channels);

struct DataSparsity {
  Index channels_to_remove = 0;
  double effective_sparsity = 0.0;
};

// Channel data can only be removed in steps of 1/C, so a target sparsity
// is rounded down to the nearest achievable level.
DataSparsity quantize_data_sparsity(double target, Index channels);

// Removes the floor(target * C) channels that the first conv layer's mask
// pruned earliest. Throws if the mask pruned fewer channels than that.
ChannelMask quantized_channel_mask(const StructureMask& first_layer, double target, Index channels);

// Keeps only the unmasked features, in their original relative order.
Dataset apply_feature_mask(const Dataset& data, const PixelMask& mask);
Dataset apply_feature_mask(const Dataset& data, const ChannelMask& mask);

// Inverse of apply_feature_mask with zeros in the removed positions.
Dataset restore_features(const Dataset& data, const PixelMask& mask);
Dataset restore_features(const Dataset& data, const ChannelMask& mask);

nlohmann::json to_json(const PixelMask& mask);
nlohmann::json to_json(const ChannelMask& mask);
PixelMask pixel_mask_from_json(const nlohmann::json& j);
ChannelMask channel_mask_from_json(const nlohmann::json& j);

}  // namespace prunekit

#endif  // PRUNEKIT_FEATURE_TRACE_HPP
