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

#ifndef PRUNEKIT_SURGERY_HPP
#define PRUNEKIT_SURGERY_HPP

#include "prunekit/network.hpp"
#include "prunekit/sparsity.hpp"

#include <string>
#include <vector>

namespace prunekit {

// What the network's raw inputs are indexed by.
enum class FeatureKind {
  // Flattened sample positions (y * W + x for a single-channel image).
  Flat,
  // Input channels of a (C, H, W) sample.
  Channel,
};

struct LayerRemoval {
  std::size_t layer_index = 0;
  // Sorted, unique.
  std::vector<Index> removed_inputs;
  // Sorted, unique.
  std::vector<Index> removed_outputs;

  friend bool operator==(const LayerRemoval&, const LayerRemoval&) = default;
};

// Network-wide deletion list. One entry per parameter layer, in order.
struct RemovalPlan {
  std::vector<LayerRemoval> layers;
  std::vector<Index> removed_input_features;
  FeatureKind feature_kind = FeatureKind::Flat;
  // Raw input features of the network the plan was built for.
  Index feature_count = 0;

  bool empty() const;
  // Entry for a network layer index, or nullptr.
  const LayerRemoval* find(std::size_t layer_index) const;

  friend bool operator==(const RemovalPlan&, const RemovalPlan&) = default;
};

struct PlanViolation {
  enum class Kind { Closure, Collapse, ClassifierOutput, OutOfRange, Unsupported, Malformed };
  Kind kind;
  std::size_t layer_index;
  Index structure_index;
  std::string message;
};

// Turns keep=false structures into a cascade-closed plan: a removed input
// structure takes the producing unit (or raw input feature) with it, a
// removed output unit takes the consuming input structure with it.
template <typename Scalar>
RemovalPlan build_plan(const NetworkT<Scalar>& net, const MaskSet& masks);

// Empty iff the plan is closed, in range and leaves every layer non-empty.
template <typename Scalar>
std::vector<PlanViolation> validate_plan(const NetworkT<Scalar>& net, const RemovalPlan& plan);

// Input-side masks whose keep=false entries are exactly the plan's removed
// input structures.
template <typename Scalar>
MaskSet plan_masks(const NetworkT<Scalar>& net, const RemovalPlan& plan);

// Copy of `net` with every planned input structure and output unit zeroed.
// Biases are left alone.
template <typename Scalar>
NetworkT<Scalar> apply_plan_zeros(const NetworkT<Scalar>& net, const RemovalPlan& plan);

struct LayerProvenance {
  std::size_t layer_index = 0;
  // Original indices of surviving inputs / outputs, strictly increasing.
  std::vector<Index> kept_inputs;
  std::vector<Index> kept_outputs;

  friend bool operator==(const LayerProvenance&, const LayerProvenance&) = default;
};

template <typename Scalar>
struct ShrunkNetworkT {
  NetworkT<Scalar> net;
  Shape original_input_shape;
  FeatureKind feature_kind = FeatureKind::Flat;
  // Original indices of surviving raw input features.
  std::vector<Index> kept_features;
  // One per parameter layer.
  std::vector<LayerProvenance> provenance;
};
using ShrunkNetwork = ShrunkNetworkT<float>;

// Rebuilds a smaller dense network. Throws std::runtime_error containing
// "layer collapsed" when the plan empties a layer, std::invalid_argument
// for any other plan violation.
template <typename Scalar>
ShrunkNetworkT<Scalar> shrink(const NetworkT<Scalar>& net, const RemovalPlan& plan);

// Scatters shrunk parameters back into `original`'s shapes, zero-filled.
template <typename Scalar>
NetworkT<Scalar> expand(const ShrunkNetworkT<Scalar>& shrunk, const NetworkT<Scalar>& original);

std::string to_string(const PlanViolation& v);

#define PRUNEKIT_EXTERN_SURGERY(S)                                                                       \
  extern template RemovalPlan build_plan<S>(const NetworkT<S>&, const MaskSet&);                        \
  extern template std::vector<PlanViolation> validate_plan<S>(const NetworkT<S>&, const RemovalPlan&);  \
  extern template MaskSet plan_masks<S>(const NetworkT<S>&, const RemovalPlan&);                        \
  extern template NetworkT<S> apply_plan_zeros<S>(const NetworkT<S>&, const RemovalPlan&);              \
  extern template ShrunkNetworkT<S> shrink<S>(const NetworkT<S>&, const RemovalPlan&);                  \
  extern template NetworkT<S> expand<S>(const ShrunkNetworkT<S>&, const NetworkT<S>&);

PRUNEKIT_EXTERN_SURGERY(float)
PRUNEKIT_EXTERN_SURGERY(double)
#undef PRUNEKIT_EXTERN_SURGERY

}  // namespace prunekit

#endif  // PRUNEKIT_SURGERY_HPP
