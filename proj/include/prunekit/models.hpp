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

#ifndef PRUNEKIT_MODELS_HPP
#define PRUNEKIT_MODELS_HPP

#include "prunekit/network.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace prunekit {

enum class Arch { Mlp, SmallVgg };

Arch parse_arch(std::string_view name);
std::string_view arch_name(Arch arch);

// Hidden sizes of the reference MLP (784 -> 120 -> 80 -> 10 on MNIST).
inline const std::vector<Index> kMlpHidden{120, 80};
// Conv widths of the three SmallVGG blocks (two 3x3 convs each).
inline const std::vector<Index> kSmallVggWidths{32, 64, 128};

// Linear/ReLU chain, no ReLU after the classifier. Parameters zeroed.
Network make_mlp(Index inputs, const std::vector<Index>& hidden, Index classes);

// 3x3 conv blocks with 2x2 max-pool between blocks, global average pool,
// flatten and one linear classifier. Parameters zeroed.
Network make_small_vgg(const Shape& input, const std::vector<Index>& widths, Index classes);

Network make_model(Arch arch, const Shape& input, Index classes);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases, drawn
// layer by layer from one engine.
template <typename Scalar>
void initialize(NetworkT<Scalar>& net, std::mt19937_64& rng);

template <typename Scalar>
void initialize(NetworkT<Scalar>& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  initialize(net, rng);
}

extern template void initialize<float>(NetworkT<float>&, std::mt19937_64&);
extern template void initialize<double>(NetworkT<double>&, std::mt19937_64&);

}  // namespace prunekit

#endif  // PRUNEKIT_MODELS_HPP
