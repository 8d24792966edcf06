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

#ifndef PRUNEKIT_SPARSITY_HPP
#define PRUNEKIT_SPARSITY_HPP

#include "prunekit/network.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace prunekit {

// Shape of a prunable group of weights.
//  - LinearInputStructure: weights[m, :] (everything fed by input m)
//  - LinearOutputStructure: weights[:, n]
//  - ConvSharedKernel: weights[:, i, :, :] (every filter's kernel on channel i)
//  - ConvFilter: weights[o, :, :, :]
enum class Granularity { LinearInputStructure, LinearOutputStructure, ConvSharedKernel, ConvFilter };

std::string_view granularity_name(Granularity g);
Granularity parse_granularity(std::string_view name);

// Input-side granularities remove what a layer consumes; output-side ones
// remove what it produces.
constexpr bool is_input_side(Granularity g) {
  return g == Granularity::LinearInputStructure || g == Granularity::ConvSharedKernel;
}

struct StructureMask {
  std::size_t layer_index = 0;
  Granularity granularity = Granularity::LinearInputStructure;
  std::vector<bool> keep;
  // Pruned indices in the order they were removed (lowest score first
  // within one pruning call).
  std::vector<Index> pruned_order;

  Index size() const { return static_cast<Index>(keep.size()); }
  Index pruned_count() const;
  // Pruned indices, ascending.
  std::vector<Index> pruned() const;

  friend bool operator==(const StructureMask&, const StructureMask&) = default;
};

using MaskSet = std::vector<StructureMask>;

// Which granularity each prunable layer gets.
enum class PrunePolicy {
  // LinearInputStructure on linear layers, ConvSharedKernel on conv layers.
  InputStructures,
  // LinearOutputStructure / ConvFilter on every layer except the classifier.
  OutputStructures,
};

// Number of structures of `g` in a layer; throws if g does not fit the layer.
template <typename Scalar>
Index structure_count(const LayerT<Scalar>& layer, Granularity g);

// l1-norm of every structure. Bias is not part of any structure.
template <typename Scalar>
Vector<Scalar> structure_scores(const LayerT<Scalar>& layer, Granularity g);

// round(sparsity * n), half away from zero.
Index prune_count(Index structures, double sparsity);

// The prune_count(scores.size(), sparsity) smallest scores, ties to the
// lower index. Returned ascending.
template <typename Scalar>
std::vector<Index> select_prune_set(std::span<const Scalar> scores, double sparsity);

enum class SparsityCurve { Cubic, CosineRamp };

std::string_view curve_name(SparsityCurve c);
SparsityCurve parse_curve(std::string_view name);

// Sparsity ramp from 0 to final_sparsity, flat after the ramp end.
struct SparsitySchedule {
  double final_sparsity = 0.0;
  std::int64_t total_steps = 1;
  double ramp_end_fraction = 0.5;
  SparsityCurve curve = SparsityCurve::Cubic;
};

double sparsity_at(const SparsitySchedule& schedule, std::int64_t step);

// All-true masks for every parameter layer of `net` under `policy`.
template <typename Scalar>
MaskSet make_masks(const NetworkT<Scalar>& net, PrunePolicy policy = PrunePolicy::InputStructures);

// Throws if a mask does not fit the layer it names.
template <typename Scalar>
void validate_masks(const NetworkT<Scalar>& net, const MaskSet& masks);

// Raises every layer's pruned count to prune_count(n, sparsity). Already
// pruned structures stay pruned and count toward the target; the rest are
// picked by l1 score among live structures. Zeroes all masked weights.
template <typename Scalar>
void apply_pruning(NetworkT<Scalar>& net, MaskSet& masks, double sparsity);

template <typename Scalar>
void apply_pruning(NetworkT<Scalar>& net, MaskSet& masks, const SparsitySchedule& schedule, std::int64_t step) {
  apply_pruning(net, masks, sparsity_at(schedule, step));
}

// Writes exact zeros into every keep=false structure. Output-side
// structures also lose their bias so the unit is fully dead.
template <typename Scalar>
void enforce_masks(NetworkT<Scalar>& net, const MaskSet& masks);

// Zeroes gradient entries inside keep=false structures.
template <typename Scalar>
void mask_gradients(GradientsT<Scalar>& grads, const NetworkT<Scalar>& net, const MaskSet& masks);

// Count of structures in a layer whose weights are all exactly zero.
template <typename Scalar>
Index zero_structure_count(const LayerT<Scalar>& layer, Granularity g);

}  // namespace prunekit

#endif  // PRUNEKIT_SPARSITY_HPP
