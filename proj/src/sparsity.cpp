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

#include "prunekit/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace prunekit {

std::string_view granularity_name(Granularity g) {
  switch (g) {
    case Granularity::LinearInputStructure: return "linear_input";
    case Granularity::LinearOutputStructure: return "linear_output";
    case Granularity::ConvSharedKernel: return "conv_shared_kernel";
    case Granularity::ConvFilter: return "conv_filter";
  }
  return "?";
}

Granularity parse_granularity(std::string_view name) {
  for (auto g : {Granularity::LinearInputStructure, Granularity::LinearOutputStructure,
                 Granularity::ConvSharedKernel, Granularity::ConvFilter}) {
    if (granularity_name(g) == name) return g;
  }
  throw std::invalid_argument("unknown granularity '" + std::string(name) + "'");
}

std::string_view curve_name(SparsityCurve c) { return c == SparsityCurve::Cubic ? "cubic" : "cosine"; }

SparsityCurve parse_curve(std::string_view name) {
  if (name == "cubic") return SparsityCurve::Cubic;
  if (name == "cosine" || name == "cosine_ramp") return SparsityCurve::CosineRamp;
  throw std::invalid_argument("unknown sparsity curve '" + std::string(name) + "'");
}

Index StructureMask::pruned_count() const {
  return static_cast<Index>(std::count(keep.begin(), keep.end(), false));
}

std::vector<Index> StructureMask::pruned() const {
  std::vector<Index> out;
  for (std::size_t j = 0; j < keep.size(); ++j) {
    if (!keep[j]) out.push_back(static_cast<Index>(j));
  }
  return out;
}

namespace {

[[noreturn]] void incompatible(Granularity g, const std::string& layer) {
  throw std::invalid_argument("granularity " + std::string(granularity_name(g)) + " does not apply to " + layer);
}

// Calls fn(flat_index) for every weight of structure j, in storage order.
template <typename Scalar, typename Fn>
void for_each_weight(const LayerT<Scalar>& layer, Granularity g, Index j, Fn&& fn) {
  if (const auto* l = std::get_if<LinearT<Scalar>>(&layer)) {
    const Index rows = l->in_features(), cols = l->out_features();
    if (g == Granularity::LinearInputStructure) {
      for (Index n = 0; n < cols; ++n) fn(j * cols + n);
    } else if (g == Granularity::LinearOutputStructure) {
      for (Index m = 0; m < rows; ++m) fn(m * cols + j);
    } else {
      incompatible(g, layer_name(layer));
    }
  } else if (const auto* c = std::get_if<ConvT<Scalar>>(&layer)) {
    const Index outs = c->out_channels(), ins = c->in_channels(), area = c->kernel_area();
    if (g == Granularity::ConvSharedKernel) {
      for (Index o = 0; o < outs; ++o) {
        for (Index k = 0; k < area; ++k) fn((o * ins + j) * area + k);
      }
    } else if (g == Granularity::ConvFilter) {
      for (Index k = 0; k < ins * area; ++k) fn(j * ins * area + k);
    } else {
      incompatible(g, layer_name(layer));
    }
  } else {
    incompatible(g, layer_name(layer));
  }
}

template <typename Scalar>
TensorT<Scalar>& weights_of(LayerT<Scalar>& layer) {
  if (auto* l = std::get_if<LinearT<Scalar>>(&layer)) return l->weights;
  return std::get<ConvT<Scalar>>(layer).weights;
}
template <typename Scalar>
const TensorT<Scalar>& weights_of(const LayerT<Scalar>& layer) {
  if (const auto* l = std::get_if<LinearT<Scalar>>(&layer)) return l->weights;
  return std::get<ConvT<Scalar>>(layer).weights;
}
template <typename Scalar>
TensorT<Scalar>& bias_of(LayerT<Scalar>& layer) {
  if (auto* l = std::get_if<LinearT<Scalar>>(&layer)) return l->bias;
  return std::get<ConvT<Scalar>>(layer).bias;
}

const StructureMask& checked(const StructureMask& mask, std::size_t layers) {
  if (mask.layer_index >= layers) {
    throw std::invalid_argument("mask names layer " + std::to_string(mask.layer_index) + " but network has " +
                                std::to_string(layers) + " layers");
  }
  return mask;
}

}  // namespace

template <typename Scalar>
Index structure_count(const LayerT<Scalar>& layer, Granularity g) {
  if (const auto* l = std::get_if<LinearT<Scalar>>(&layer)) {
    if (g == Granularity::LinearInputStructure) return l->in_features();
    if (g == Granularity::LinearOutputStructure) return l->out_features();
  } else if (const auto* c = std::get_if<ConvT<Scalar>>(&layer)) {
    if (g == Granularity::ConvSharedKernel) return c->in_channels();
    if (g == Granularity::ConvFilter) return c->out_channels();
  }
  incompatible(g, layer_name(layer));
}

template <typename Scalar>
Vector<Scalar> structure_scores(const LayerT<Scalar>& layer, Granularity g) {
  const Index n = structure_count(layer, g);
  const Scalar* w = weights_of(layer).data();
  Vector<Scalar> scores(n);
  for (Index j = 0; j < n; ++j) {
    Scalar sum(0);
    for_each_weight(layer, g, j, [&](Index idx) { sum += std::abs(w[idx]); });
    scores[j] = sum;
  }
  return scores;
}

Index prune_count(Index structures, double sparsity) {
  if (!(sparsity >= 0.0 && sparsity < 1.0)) {
    throw std::invalid_argument("sparsity must lie in [0, 1), got " + std::to_string(sparsity));
  }
  return static_cast<Index>(std::llround(sparsity * static_cast<double>(structures)));
}

template <typename Scalar>
std::vector<Index> select_prune_set(std::span<const Scalar> scores, double sparsity) {
  const Index k = prune_count(static_cast<Index>(scores.size()), sparsity);
  std::vector<Index> order(scores.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

double sparsity_at(const SparsitySchedule& schedule, std::int64_t step) {
  if (schedule.total_steps < 1 || !(schedule.ramp_end_fraction > 0.0 && schedule.ramp_end_fraction <= 1.0) ||
      !(schedule.final_sparsity >= 0.0 && schedule.final_sparsity < 1.0)) {
    throw std::invalid_argument("invalid sparsity schedule");
  }
  if (step < 0 || step > schedule.total_steps) {
    throw std::out_of_range("sparsity step " + std::to_string(step) + " outside [0, " +
                            std::to_string(schedule.total_steps) + "]");
  }
  const double ramp_end = schedule.ramp_end_fraction * static_cast<double>(schedule.total_steps);
  const double t = std::min(static_cast<double>(step) / ramp_end, 1.0);
  if (t >= 1.0) return schedule.final_sparsity;
  if (schedule.curve == SparsityCurve::Cubic) {
    const double rest = 1.0 - t;
    return schedule.final_sparsity * (1.0 - rest * rest * rest);
  }
  return schedule.final_sparsity * 0.5 * (1.0 - std::cos(std::numbers::pi * t));
}

template <typename Scalar>
MaskSet make_masks(const NetworkT<Scalar>& net, PrunePolicy policy) {
  MaskSet masks;
  const auto params = net.parameter_layers();
  for (std::size_t pos = 0; pos < params.size(); ++pos) {
    const std::size_t i = params[pos];
    const bool linear = is_linear(net.layers[i]);
    Granularity g;
    if (policy == PrunePolicy::InputStructures) {
      g = linear ? Granularity::LinearInputStructure : Granularity::ConvSharedKernel;
    } else {
      if (pos + 1 == params.size()) continue;  // classifier outputs are never pruned
      g = linear ? Granularity::LinearOutputStructure : Granularity::ConvFilter;
    }
    const Index n = structure_count(net.layers[i], g);
    masks.push_back({i, g, std::vector<bool>(static_cast<std::size_t>(n), true), {}});
  }
  return masks;
}

template <typename Scalar>
void validate_masks(const NetworkT<Scalar>& net, const MaskSet& masks) {
  for (const auto& mask : masks) {
    const auto& layer = net.layers[checked(mask, net.layers.size()).layer_index];
    const Index n = structure_count(layer, mask.granularity);
    if (mask.size() != n) {
      throw std::invalid_argument("mask for layer " + std::to_string(mask.layer_index) + " has " +
                                  std::to_string(mask.size()) + " entries, layer has " + std::to_string(n) +
                                  " " + std::string(granularity_name(mask.granularity)) + " structures");
    }
  }
}

template <typename Scalar>
void apply_pruning(NetworkT<Scalar>& net, MaskSet& masks, double sparsity) {
  validate_masks(net, masks);
  for (auto& mask : masks) {
    const auto& layer = net.layers[mask.layer_index];
    const Index target = prune_count(mask.size(), sparsity);
    const Index already = mask.pruned_count();
    if (target <= already) continue;
    const Vector<Scalar> scores = structure_scores(layer, mask.granularity);
    std::vector<Index> live;
    for (Index j = 0; j < mask.size(); ++j) {
      if (mask.keep[static_cast<std::size_t>(j)]) live.push_back(j);
    }
    std::stable_sort(live.begin(), live.end(), [&](Index a, Index b) { return scores[a] < scores[b]; });
    for (Index r = 0; r < target - already; ++r) {
      const Index j = live[static_cast<std::size_t>(r)];
      mask.keep[static_cast<std::size_t>(j)] = false;
      mask.pruned_order.push_back(j);
    }
  }
  enforce_masks(net, masks);
}

template <typename Scalar>
void enforce_masks(NetworkT<Scalar>& net, const MaskSet& masks) {
  for (const auto& mask : masks) {
    auto& layer = net.layers[checked(mask, net.layers.size()).layer_index];
    Scalar* w = weights_of(layer).data();
    for (Index j = 0; j < mask.size(); ++j) {
      if (mask.keep[static_cast<std::size_t>(j)]) continue;
      for_each_weight(layer, mask.granularity, j, [&](Index idx) { w[idx] = Scalar(0); });
      if (!is_input_side(mask.granularity)) bias_of(layer)[j] = Scalar(0);
    }
  }
}

template <typename Scalar>
void mask_gradients(GradientsT<Scalar>& grads, const NetworkT<Scalar>& net, const MaskSet& masks) {
  if (grads.size() != net.layers.size()) throw std::invalid_argument("gradient list does not match network");
  for (const auto& mask : masks) {
    const auto& layer = net.layers[checked(mask, net.layers.size()).layer_index];
    auto& g = grads[mask.layer_index];
    if (g.weights.shape() != weights_of(layer).shape()) {
      throw std::invalid_argument("gradient shape mismatch at layer " + std::to_string(mask.layer_index));
    }
    for (Index j = 0; j < mask.size(); ++j) {
      if (mask.keep[static_cast<std::size_t>(j)]) continue;
      for_each_weight(layer, mask.granularity, j, [&](Index idx) { g.weights[idx] = Scalar(0); });
      if (!is_input_side(mask.granularity)) g.bias[j] = Scalar(0);
    }
  }
}

template <typename Scalar>
Index zero_structure_count(const LayerT<Scalar>& layer, Granularity g) {
  const Index n = structure_count(layer, g);
  const Scalar* w = weights_of(layer).data();
  Index zeros = 0;
  for (Index j = 0; j < n; ++j) {
    bool all_zero = true;
    for_each_weight(layer, g, j, [&](Index idx) { all_zero = all_zero && w[idx] == Scalar(0); });
    zeros += all_zero ? 1 : 0;
  }
  return zeros;
}

#define PRUNEKIT_INSTANTIATE_SPARSITY(S)                                                  \
  template Index structure_count<S>(const LayerT<S>&, Granularity);                     \
  template Vector<S> structure_scores<S>(const LayerT<S>&, Granularity);                \
  template std::vector<Index> select_prune_set<S>(std::span<const S>, double);          \
  template MaskSet make_masks<S>(const NetworkT<S>&, PrunePolicy);                      \
  template void validate_masks<S>(const NetworkT<S>&, const MaskSet&);                  \
  template void apply_pruning<S>(NetworkT<S>&, MaskSet&, double);                       \
  template void enforce_masks<S>(NetworkT<S>&, const MaskSet&);                         \
  template void mask_gradients<S>(GradientsT<S>&, const NetworkT<S>&, const MaskSet&);  \
  template Index zero_structure_count<S>(const LayerT<S>&, Granularity);

PRUNEKIT_INSTANTIATE_SPARSITY(float)
PRUNEKIT_INSTANTIATE_SPARSITY(double)

}  // namespace prunekit
