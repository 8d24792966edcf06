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

#include "doctest.h"

#include "prunekit/budget.hpp"
#include "prunekit/models.hpp"
#include "prunekit/surgery.hpp"
#include "support/test_support.hpp"

#include <string>

using namespace prunekit;
using namespace prunekit::testing;

namespace {

bool strictly_increasing(const std::vector<Index>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] <= v[i - 1]) return false;
  }
  return true;
}

Network pruned_mlp(double sparsity, std::uint64_t seed, MaskSet& masks) {
  Network net = make_mlp(784, kMlpHidden, 10);
  initialize(net, seed);
  masks = make_masks(net);
  apply_pruning(net, masks, sparsity);
  return net;
}

}  // namespace

TEST_CASE("mlp at 50% shrinks to 392-60-40-10") {
  MaskSet masks;
  const Network net = pruned_mlp(0.5, 1, masks);
  const RemovalPlan plan = build_plan(net, masks);
  CHECK(validate_plan(net, plan).empty());
  CHECK(plan.removed_input_features.size() == 392);
  const ShrunkNetwork s = shrink(net, plan);
  CHECK(s.net.input_shape == Shape{392});
  const auto& l0 = std::get<Linear>(s.net.layers[0]);
  const auto& l1 = std::get<Linear>(s.net.layers[2]);
  const auto& l2 = std::get<Linear>(s.net.layers[4]);
  CHECK(l0.weights.shape() == Shape{392, 60});
  CHECK(l1.weights.shape() == Shape{60, 40});
  CHECK(l2.weights.shape() == Shape{40, 10});
  CHECK(s.kept_features.size() == 392);
  for (const auto& p : s.provenance) {
    CHECK(strictly_increasing(p.kept_inputs));
    CHECK(strictly_increasing(p.kept_outputs));
  }
  CHECK(s.provenance.back().kept_outputs.size() == 10);
}

TEST_CASE("shrunk network computes the masked network's function") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Network net = random_surgery_network(rng);
    MaskSet masks = make_masks(net, trial % 4 == 3 ? PrunePolicy::OutputStructures : PrunePolicy::InputStructures);
    const double s = std::uniform_real_distribution<double>(0.05, 0.6)(rng);
    apply_pruning(net, masks, s);
    const RemovalPlan plan = build_plan(net, masks);
    ShrunkNetwork shrunk;
    try {
      shrunk = shrink(net, plan);
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("layer collapsed") != std::string::npos);
      continue;
    }
    Shape shape{50};
    shape.insert(shape.end(), net.input_shape.begin(), net.input_shape.end());
    const Tensor x = random_tensor<float>(shape, rng);
    const auto r = compare_outputs(forward(net, x), forward(shrunk.net, select_features(x, shrunk)));
    CHECK(r.max_relative_diff <= 1e-5);
    CHECK(r.argmax_mismatches == 0);

    // expand puts every surviving parameter back where it came from.
    const Network back = expand(shrunk, net);
    const Network zeroed = apply_plan_zeros(net, plan);
    for (auto i : net.parameter_layers()) {
      std::visit(
          [&](const auto& orig) {
            using L = std::decay_t<decltype(orig)>;
            if constexpr (std::is_same_v<L, Linear> || std::is_same_v<L, Conv>) {
              CHECK(std::get<L>(back.layers[i]).weights == std::get<L>(zeroed.layers[i]).weights);
            }
          },
          net.layers[i]);
    }
  }
}

TEST_CASE("plan closure") {
  MaskSet masks;
  const Network net = pruned_mlp(0.5, 2, masks);
  const RemovalPlan plan = build_plan(net, masks);
  // Input j removed at layer 2 implies output j removed at layer 0.
  for (Index j : plan.layers[1].removed_inputs) {
    CHECK(std::binary_search(plan.layers[0].removed_outputs.begin(), plan.layers[0].removed_outputs.end(), j));
  }
  CHECK(plan.layers[2].removed_outputs.empty());

  RemovalPlan broken = plan;
  broken.layers[0].removed_outputs.pop_back();
  const auto v = validate_plan(net, broken);
  REQUIRE_FALSE(v.empty());
  CHECK(v.front().kind == PlanViolation::Kind::Closure);
  CHECK_THROWS_AS(shrink(net, broken), std::invalid_argument);

  RemovalPlan classifier = plan;
  classifier.layers[2].removed_outputs = {3};
  bool flagged = false;
  for (const auto& x : validate_plan(net, classifier)) flagged |= x.kind == PlanViolation::Kind::ClassifierOutput;
  CHECK(flagged);

  // Round trip through input-side masks.
  CHECK(build_plan(net, plan_masks(net, plan)) == plan);
}

TEST_CASE("collapse is an error naming the layer") {
  Network net = make_mlp(6, {3}, 2);
  initialize(net, 3);
  MaskSet masks = make_masks(net);
  apply_pruning(net, masks, 0.9);  // round(0.9 * 3) = 3 of the hidden units
  const RemovalPlan plan = build_plan(net, masks);
  try {
    shrink(net, plan);
    FAIL("expected a collapse");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("layer collapsed") != std::string::npos);
  }
}

TEST_CASE("removal through a spatial flatten is rejected") {
  Network net{{1, 4, 4}, {}};
  net.layers.emplace_back(conv_layer<float>(1, 3, 3, 1, 1));
  net.layers.emplace_back(ReLU{});
  net.layers.emplace_back(Flatten{});
  net.layers.emplace_back(linear_layer<float>(48, 2));
  initialize(net, 4);
  MaskSet masks = make_masks(net);
  apply_pruning(net, masks, 0.25);
  CHECK_THROWS_AS(shrink(net, build_plan(net, masks)), std::invalid_argument);
}

TEST_CASE("shrunk budget equals masked nonzero budget") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    Network net = random_surgery_network(rng);
    MaskSet masks = make_masks(net);
    apply_pruning(net, masks, 0.4);
    const RemovalPlan plan = build_plan(net, masks);
    ShrunkNetwork s;
    try {
      s = shrink(net, plan);
    } catch (const std::runtime_error&) {
      continue;
    }
    const Network masked = apply_plan_zeros(net, plan);
    // Biases of removed units survive in the zeroed copy but not in the shrunk one.
    std::int64_t removed_biases = 0;
    for (const auto& entry : plan.layers) {
      std::visit(
          [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, Linear> || std::is_same_v<L, Conv>) {
              for (Index o : entry.removed_outputs) removed_biases += l.bias[o] != 0.0f;
            }
          },
          masked.layers[entry.layer_index]);
    }
    CHECK(count_params(s.net).total == count_params(masked).nonzero - removed_biases);
    CHECK(count_flops(s.net).total == count_flops(masked).nonzero);
  }
}
