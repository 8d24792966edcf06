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

#ifndef PRUNEKIT_CHECKPOINT_HPP
#define PRUNEKIT_CHECKPOINT_HPP

#include "prunekit/network.hpp"
#include "prunekit/surgery.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace prunekit {

// A trained network plus where its inputs and units came from. For a dense
// network on full data, kept_features covers every feature and provenance
// is empty.
struct Checkpoint {
  Network net;
  Shape original_input_shape;
  FeatureKind feature_kind = FeatureKind::Flat;
  std::vector<Index> kept_features;
  std::vector<LayerProvenance> provenance;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

Checkpoint make_checkpoint(const Network& net);
Checkpoint make_checkpoint(const ShrunkNetwork& shrunk);
// Dense network trained on a feature subset of `original_input_shape`.
Checkpoint make_checkpoint(const Network& net, const Shape& original_input_shape, FeatureKind kind,
                           std::vector<Index> kept_features);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace prunekit

#endif  // PRUNEKIT_CHECKPOINT_HPP
