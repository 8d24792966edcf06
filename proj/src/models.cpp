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

#include "prunekit/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prunekit {

Arch parse_arch(std::string_view name) {
  if (name == "mlp") return Arch::Mlp;
  if (name == "smallvgg") return Arch::SmallVgg;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

std::string_view arch_name(Arch arch) { return arch == Arch::Mlp ? "mlp" : "smallvgg"; }

Network make_mlp(Index inputs, const std::vector<Index>& hidden, Index classes) {
  Network net{{inputs}, {}};
  Index fan_in = inputs;
  for (Index width : hidden) {
    net.layers.emplace_back(Linear{Tensor({fan_in, width}), Tensor({width})});
    net.layers.emplace_back(ReLU{});
    fan_in = width;
  }
  net.layers.emplace_back(Linear{Tensor({fan_in, classes}), Tensor({classes})});
  return net;
}

Network make_small_vgg(const Shape& input, const std::vector<Index>& widths, Index classes) {
  if (input.size() != 3) throw std::invalid_argument("SmallVGG expects (C,H,W) input, got " + to_string(input));
  Network net{input, {}};
  Index channels = input[0];
  for (std::size_t block = 0; block < widths.size(); ++block) {
    if (block > 0) net.layers.emplace_back(MaxPool2d{2});
    for (int rep = 0; rep < 2; ++rep) {
      net.layers.emplace_back(Conv{Tensor({widths[block], channels, 3, 3}), Tensor({widths[block]}), 1, 1});
      net.layers.emplace_back(ReLU{});
      channels = widths[block];
    }
  }
  net.layers.emplace_back(GlobalAvgPool{});
  net.layers.emplace_back(Flatten{});
  net.layers.emplace_back(Linear{Tensor({channels, classes}), Tensor({classes})});
  infer_shapes(net);
  return net;
}

Network make_model(Arch arch, const Shape& input, Index classes) {
  if (arch == Arch::Mlp) return make_mlp(shape_size(input), kMlpHidden, classes);
  return make_small_vgg(input, kSmallVggWidths, classes);
}

template <typename Scalar>
void initialize(NetworkT<Scalar>& net, std::mt19937_64& rng) {
  auto fill = [&rng](TensorT<Scalar>& t, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : t.values()) v = static_cast<Scalar>(dist(rng));
  };
  for (auto& layer : net.layers) {
    if (auto* l = std::get_if<LinearT<Scalar>>(&layer)) {
      fill(l->weights, l->in_features());
      fill(l->bias, l->in_features());
    } else if (auto* c = std::get_if<ConvT<Scalar>>(&layer)) {
      fill(c->weights, c->in_channels() * c->kernel_area());
      fill(c->bias, c->in_channels() * c->kernel_area());
    }
  }
}

template void initialize<float>(NetworkT<float>&, std::mt19937_64&);
template void initialize<double>(NetworkT<double>&, std::mt19937_64&);

}  // namespace prunekit
