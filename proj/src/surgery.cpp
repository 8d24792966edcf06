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

#include "prunekit/surgery.hpp"

#include <algorithm>
#include <stdexcept>

namespace prunekit {

bool RemovalPlan::empty() const {
  return removed_input_features.empty() &&
         std::all_of(layers.begin(), layers.end(),
                     [](const LayerRemoval& l) { return l.removed_inputs.empty() && l.removed_outputs.empty(); });
}

const LayerRemoval* RemovalPlan::find(std::size_t layer_index) const {
  for (const auto& l : layers) {
    if (l.layer_index == layer_index) return &l;
  }
  return nullptr;
}

std::string to_string(const PlanViolation& v) {
  static constexpr const char* kinds[] = {"closure", "collapse", "classifier-output", "out-of-range",
                                          "unsupported", "malformed"};
  return std::string(kinds[static_cast<int>(v.kind)]) + " at layer " + std::to_string(v.layer_index) +
         ", structure " + std::to_string(v.structure_index) + ": " + v.message;
}

namespace {

// The parameter layers of a network seen as a chain of unit spaces.
struct Chain {
  std::vector<std::size_t> params;
  std::vector<Index> inputs;   // input structures per parameter layer
  std::vector<Index> outputs;  // output units per parameter layer
  // True where layer k's inputs are a spatial flatten of layer k-1's (or the
  // raw input's) channels, so one upstream unit feeds several inputs.
  std::vector<bool> spatial;
  FeatureKind kind = FeatureKind::Flat;
  Index features = 0;
};

template <typename Scalar>
Chain describe(const NetworkT<Scalar>& net) {
  const auto shapes = infer_shapes(net);
  Chain chain;
  chain.params = net.parameter_layers();
  if (chain.params.empty()) throw std::invalid_argument("network has no parameter layers");
  for (std::size_t pos = 0; pos < chain.params.size(); ++pos) {
    const auto& layer = net.layers[chain.params[pos]];
    if (const auto* l = std::get_if<LinearT<Scalar>>(&layer)) {
      chain.inputs.push_back(l->in_features());
      chain.outputs.push_back(l->out_features());
      if (pos == 0) {
        chain.spatial.push_back(false);
      } else {
        chain.spatial.push_back(chain.outputs[pos - 1] != l->in_features());
      }
    } else {
      const auto& c = std::get<ConvT<Scalar>>(layer);
      chain.inputs.push_back(c.in_channels());
      chain.outputs.push_back(c.out_channels());
      chain.spatial.push_back(false);
    }
  }
  chain.kind = is_conv(net.layers[chain.params.front()]) ? FeatureKind::Channel : FeatureKind::Flat;
  chain.features = chain.kind == FeatureKind::Channel ? net.input_shape.at(0) : shape_size(net.input_shape);
  return chain;
}

void sort_unique(std::vector<Index>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<Index> complement(const std::vector<Index>& removed, Index n) {
  std::vector<Index> kept;
  kept.reserve(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    if (!std::binary_search(removed.begin(), removed.end(), j)) kept.push_back(j);
  }
  return kept;
}

bool contains(const std::vector<Index>& sorted, Index j) { return std::binary_search(sorted.begin(), sorted.end(), j); }

}  // namespace

template <typename Scalar>
RemovalPlan build_plan(const NetworkT<Scalar>& net, const MaskSet& masks) {
  validate_masks(net, masks);
  const Chain chain = describe(net);
  RemovalPlan plan;
  plan.feature_kind = chain.kind;
  plan.feature_count = chain.features;
  for (std::size_t idx : chain.params) plan.layers.push_back({idx, {}, {}});

  auto position = [&](std::size_t layer_index) {
    const auto it = std::find(chain.params.begin(), chain.params.end(), layer_index);
    return static_cast<std::size_t>(it - chain.params.begin());
  };
  for (const auto& mask : masks) {
    auto& entry = plan.layers[position(mask.layer_index)];
    for (Index j : mask.pruned()) {
      (is_input_side(mask.granularity) ? entry.removed_inputs : entry.removed_outputs).push_back(j);
    }
  }

  const std::size_t last = chain.params.size() - 1;
  for (std::size_t pos = 0; pos <= last; ++pos) {
    auto& outs = plan.layers[pos].removed_outputs;
    if (outs.empty()) continue;
    if (pos == last) {
      throw std::invalid_argument("output units of the classifier (layer " + std::to_string(chain.params[pos]) +
                                  ") cannot be removed");
    }
    if (chain.spatial[pos + 1]) {
      throw std::invalid_argument("cannot remove units feeding a spatial flatten at layer " +
                                  std::to_string(chain.params[pos + 1]));
    }
    auto& next = plan.layers[pos + 1].removed_inputs;
    next.insert(next.end(), outs.begin(), outs.end());
  }
  for (std::size_t pos = 0; pos <= last; ++pos) {
    auto& ins = plan.layers[pos].removed_inputs;
    sort_unique(ins);
    if (ins.empty()) continue;
    if (chain.spatial[pos]) {
      throw std::invalid_argument("surgery through a spatial flatten is not supported (layer " +
                                  std::to_string(chain.params[pos]) + ")");
    }
    auto& upstream = pos == 0 ? plan.removed_input_features : plan.layers[pos - 1].removed_outputs;
    upstream.insert(upstream.end(), ins.begin(), ins.end());
  }
  for (auto& entry : plan.layers) sort_unique(entry.removed_outputs);
  sort_unique(plan.removed_input_features);
  return plan;
}

template <typename Scalar>
std::vector<PlanViolation> validate_plan(const NetworkT<Scalar>& net, const RemovalPlan& plan) {
  using Kind = PlanViolation::Kind;
  std::vector<PlanViolation> out;
  const Chain chain = describe(net);
  if (plan.layers.size() != chain.params.size()) {
    out.push_back({Kind::Malformed, 0, 0, "plan has " + std::to_string(plan.layers.size()) + " entries for " +
                                              std::to_string(chain.params.size()) + " parameter layers"});
    return out;
  }
  for (std::size_t pos = 0; pos < chain.params.size(); ++pos) {
    if (plan.layers[pos].layer_index != chain.params[pos]) {
      out.push_back({Kind::Malformed, plan.layers[pos].layer_index, 0, "entry does not name a parameter layer"});
      return out;
    }
  }
  if (plan.feature_kind != chain.kind || plan.feature_count != chain.features) {
    out.push_back({Kind::Malformed, chain.params.front(), 0, "input features do not match network"});
  }

  auto check_range = [&](const std::vector<Index>& v, Index n, std::size_t layer, const char* what) {
    bool ok = std::is_sorted(v.begin(), v.end()) && std::adjacent_find(v.begin(), v.end()) == v.end();
    if (!ok) out.push_back({Kind::Malformed, layer, 0, std::string(what) + " not sorted and unique"});
    for (Index j : v) {
      if (j < 0 || j >= n) {
        out.push_back({Kind::OutOfRange, layer, j, std::string(what) + " index outside [0, " + std::to_string(n) + ")"});
      }
    }
    return ok;
  };

  const std::size_t last = chain.params.size() - 1;
  check_range(plan.removed_input_features, chain.features, chain.params.front(), "input feature");
  for (std::size_t pos = 0; pos <= last; ++pos) {
    const auto& entry = plan.layers[pos];
    const std::size_t idx = chain.params[pos];
    check_range(entry.removed_inputs, chain.inputs[pos], idx, "input structure");
    check_range(entry.removed_outputs, chain.outputs[pos], idx, "output unit");
    if (static_cast<Index>(entry.removed_inputs.size()) >= chain.inputs[pos]) {
      out.push_back({Kind::Collapse, idx, 0, "layer collapsed: every input structure removed"});
    }
    if (static_cast<Index>(entry.removed_outputs.size()) >= chain.outputs[pos]) {
      out.push_back({Kind::Collapse, idx, 0, "layer collapsed: every output unit removed"});
    }
    if (pos == last) {
      for (Index o : entry.removed_outputs) {
        out.push_back({Kind::ClassifierOutput, idx, o, "classifier output units are never removed"});
      }
    }
    if (chain.spatial[pos] && !entry.removed_inputs.empty()) {
      out.push_back({Kind::Unsupported, idx, entry.removed_inputs.front(), "removal through a spatial flatten"});
      continue;
    }
    // Closure between this layer's inputs and what produces them.
    const auto& upstream = pos == 0 ? plan.removed_input_features : plan.layers[pos - 1].removed_outputs;
    const std::size_t up_idx = pos == 0 ? idx : chain.params[pos - 1];
    for (Index j : entry.removed_inputs) {
      if (!contains(upstream, j)) {
        out.push_back({Kind::Closure, up_idx, j,
                       pos == 0 ? "input structure removed but input feature kept"
                                : "input structure of layer " + std::to_string(idx) + " removed but producing unit kept"});
      }
    }
    for (Index j : upstream) {
      if (!contains(entry.removed_inputs, j)) {
        out.push_back({Kind::Closure, idx, j,
                       pos == 0 ? "input feature removed but its input structure kept"
                                : "upstream unit removed but this layer still consumes it"});
      }
    }
  }
  return out;
}

template <typename Scalar>
MaskSet plan_masks(const NetworkT<Scalar>& net, const RemovalPlan& plan) {
  MaskSet masks = make_masks(net, PrunePolicy::InputStructures);
  for (auto& mask : masks) {
    const LayerRemoval* entry = plan.find(mask.layer_index);
    if (!entry) continue;
    for (Index j : entry->removed_inputs) {
      mask.keep.at(static_cast<std::size_t>(j)) = false;
      mask.pruned_order.push_back(j);
    }
  }
  return masks;
}

template <typename Scalar>
NetworkT<Scalar> apply_plan_zeros(const NetworkT<Scalar>& net, const RemovalPlan& plan) {
  NetworkT<Scalar> out = net;
  MaskSet masks;
  for (const auto& entry : plan.layers) {
    const auto& layer = net.layers.at(entry.layer_index);
    const bool linear = is_linear(layer);
    const auto in_g = linear ? Granularity::LinearInputStructure : Granularity::ConvSharedKernel;
    const auto out_g = linear ? Granularity::LinearOutputStructure : Granularity::ConvFilter;
    StructureMask in_mask{entry.layer_index, in_g,
                          std::vector<bool>(static_cast<std::size_t>(structure_count(layer, in_g)), true), {}};
    StructureMask out_mask{entry.layer_index, out_g,
                           std::vector<bool>(static_cast<std::size_t>(structure_count(layer, out_g)), true), {}};
    for (Index j : entry.removed_inputs) in_mask.keep.at(static_cast<std::size_t>(j)) = false;
    for (Index j : entry.removed_outputs) out_mask.keep.at(static_cast<std::size_t>(j)) = false;
    masks.push_back(std::move(in_mask));
    masks.push_back(std::move(out_mask));
  }
  // Output-side masks also clear biases; restore them afterwards.
  enforce_masks(out, masks);
  for (const auto& entry : plan.layers) {
    std::visit(
        [&](auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, LinearT<Scalar>> || std::is_same_v<L, ConvT<Scalar>>) {
            const auto& src = std::get<L>(net.layers[entry.layer_index]);
            l.bias = src.bias;
          }
        },
        out.layers[entry.layer_index]);
  }
  return out;
}

template <typename Scalar>
ShrunkNetworkT<Scalar> shrink(const NetworkT<Scalar>& net, const RemovalPlan& plan) {
  const auto violations = validate_plan(net, plan);
  for (const auto& v : violations) {
    if (v.kind == PlanViolation::Kind::Collapse) {
      throw std::runtime_error(to_string(v) + " (sparsity too high for surgery)");
    }
  }
  if (!violations.empty()) throw std::invalid_argument("plan is not cascade-closed: " + to_string(violations.front()));

  const Chain chain = describe(net);
  ShrunkNetworkT<Scalar> shrunk{net, net.input_shape, chain.kind, {}, {}};
  shrunk.kept_features = complement(plan.removed_input_features, chain.features);
  if (chain.kind == FeatureKind::Channel) {
    shrunk.net.input_shape[0] = static_cast<Index>(shrunk.kept_features.size());
  } else {
    shrunk.net.input_shape = {static_cast<Index>(shrunk.kept_features.size())};
  }

  for (std::size_t pos = 0; pos < chain.params.size(); ++pos) {
    const auto& entry = plan.layers[pos];
    LayerProvenance prov{entry.layer_index, complement(entry.removed_inputs, chain.inputs[pos]),
                         complement(entry.removed_outputs, chain.outputs[pos])};
    const auto n_in = static_cast<Index>(prov.kept_inputs.size());
    const auto n_out = static_cast<Index>(prov.kept_outputs.size());
    auto& layer = shrunk.net.layers[entry.layer_index];
    if (auto* l = std::get_if<LinearT<Scalar>>(&layer)) {
      const auto src = l->weights.matrix();
      TensorT<Scalar> w(Shape{n_in, n_out}), b(Shape{n_out});
      auto dst = w.matrix();
      for (Index r = 0; r < n_in; ++r) {
        for (Index c = 0; c < n_out; ++c) dst(r, c) = src(prov.kept_inputs[r], prov.kept_outputs[c]);
      }
      for (Index c = 0; c < n_out; ++c) b[c] = l->bias[prov.kept_outputs[c]];
      l->weights = std::move(w);
      l->bias = std::move(b);
    } else {
      auto& conv = std::get<ConvT<Scalar>>(layer);
      const Index area = conv.kernel_area(), ins = conv.in_channels();
      TensorT<Scalar> w(Shape{n_out, n_in, conv.kernel_h(), conv.kernel_w()}), b(Shape{n_out});
      for (Index o = 0; o < n_out; ++o) {
        for (Index i = 0; i < n_in; ++i) {
          const Scalar* src = conv.weights.data() + (prov.kept_outputs[o] * ins + prov.kept_inputs[i]) * area;
          std::copy(src, src + area, w.data() + (o * n_in + i) * area);
        }
        b[o] = conv.bias[prov.kept_outputs[o]];
      }
      conv.weights = std::move(w);
      conv.bias = std::move(b);
    }
    shrunk.provenance.push_back(std::move(prov));
  }
  infer_shapes(shrunk.net);
  return shrunk;
}

template <typename Scalar>
NetworkT<Scalar> expand(const ShrunkNetworkT<Scalar>& shrunk, const NetworkT<Scalar>& original) {
  NetworkT<Scalar> out = original;
  for (const auto& prov : shrunk.provenance) {
    auto& dst_layer = out.layers.at(prov.layer_index);
    const auto& src_layer = shrunk.net.layers.at(prov.layer_index);
    if (auto* l = std::get_if<LinearT<Scalar>>(&dst_layer)) {
      const auto& s = std::get<LinearT<Scalar>>(src_layer);
      l->weights.vec().setZero();
      l->bias.vec().setZero();
      auto dst = l->weights.matrix();
      const auto src = s.weights.matrix();
      for (std::size_t r = 0; r < prov.kept_inputs.size(); ++r) {
        for (std::size_t c = 0; c < prov.kept_outputs.size(); ++c) {
          dst(prov.kept_inputs[r], prov.kept_outputs[c]) = src(static_cast<Index>(r), static_cast<Index>(c));
        }
      }
      for (std::size_t c = 0; c < prov.kept_outputs.size(); ++c) {
        l->bias[prov.kept_outputs[c]] = s.bias[static_cast<Index>(c)];
      }
    } else {
      auto& conv = std::get<ConvT<Scalar>>(dst_layer);
      const auto& s = std::get<ConvT<Scalar>>(src_layer);
      conv.weights.vec().setZero();
      conv.bias.vec().setZero();
      const Index area = conv.kernel_area(), ins = conv.in_channels();
      const auto n_in = static_cast<Index>(prov.kept_inputs.size());
      for (std::size_t o = 0; o < prov.kept_outputs.size(); ++o) {
        for (std::size_t i = 0; i < prov.kept_inputs.size(); ++i) {
          const Scalar* src = s.weights.data() + (static_cast<Index>(o) * n_in + static_cast<Index>(i)) * area;
          std::copy(src, src + area, conv.weights.data() + (prov.kept_outputs[o] * ins + prov.kept_inputs[i]) * area);
        }
        conv.bias[prov.kept_outputs[o]] = s.bias[static_cast<Index>(o)];
      }
    }
  }
  return out;
}

#define PRUNEKIT_INSTANTIATE_SURGERY(S)                                                          \
  template RemovalPlan build_plan<S>(const NetworkT<S>&, const MaskSet&);                       \
  template std::vector<PlanViolation> validate_plan<S>(const NetworkT<S>&, const RemovalPlan&); \
  template MaskSet plan_masks<S>(const NetworkT<S>&, const RemovalPlan&);                       \
  template NetworkT<S> apply_plan_zeros<S>(const NetworkT<S>&, const RemovalPlan&);             \
  template ShrunkNetworkT<S> shrink<S>(const NetworkT<S>&, const RemovalPlan&);                 \
  template NetworkT<S> expand<S>(const ShrunkNetworkT<S>&, const NetworkT<S>&);

PRUNEKIT_INSTANTIATE_SURGERY(float)
PRUNEKIT_INSTANTIATE_SURGERY(double)

}  // namespace prunekit
