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

#ifndef PRUNEKIT_NETWORK_HPP
#define PRUNEKIT_NETWORK_HPP

#include "prunekit/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace prunekit {

// Fully connected layer. Weights are stored (in_features, out_features) so
// input structure m is the contiguous row weights[m, :].
template <typename Scalar>
struct LinearT {
  TensorT<Scalar> weights;
  TensorT<Scalar> bias;

  Index in_features() const { return weights.dim(0); }
  Index out_features() const { return weights.dim(1); }

  template <typename To>
  LinearT<To> cast() const {
    return {weights.template cast<To>(), bias.template cast<To>()};
  }
};

// 2-d convolution, weights (out_channels, in_channels, kernel_h, kernel_w).
template <typename Scalar>
struct ConvT {
  TensorT<Scalar> weights;
  TensorT<Scalar> bias;
  Index stride = 1;
  Index padding = 0;

  Index out_channels() const { return weights.dim(0); }
  Index in_channels() const { return weights.dim(1); }
  Index kernel_h() const { return weights.dim(2); }
  Index kernel_w() const { return weights.dim(3); }
  Index kernel_area() const { return kernel_h() * kernel_w(); }

  template <typename To>
  ConvT<To> cast() const {
    return {weights.template cast<To>(), bias.template cast<To>(), stride, padding};
  }
};

struct ReLU {};
struct MaxPool2d {
  Index kernel = 2;
};
// (C, H, W) -> (C, 1, 1).
struct GlobalAvgPool {};
struct Flatten {};

template <typename Scalar>
using LayerT = std::variant<LinearT<Scalar>, ConvT<Scalar>, ReLU, MaxPool2d, GlobalAvgPool, Flatten>;

template <typename Scalar>
bool is_linear(const LayerT<Scalar>& layer) {
  return std::holds_alternative<LinearT<Scalar>>(layer);
}
template <typename Scalar>
bool is_conv(const LayerT<Scalar>& layer) {
  return std::holds_alternative<ConvT<Scalar>>(layer);
}
template <typename Scalar>
bool has_parameters(const LayerT<Scalar>& layer) {
  return is_linear(layer) || is_conv(layer);
}

template <typename Scalar>
std::string layer_name(const LayerT<Scalar>& layer);

// Per-sample output shape of one layer, or std::invalid_argument.
template <typename Scalar>
Shape layer_output_shape(const LayerT<Scalar>& layer, const Shape& input);

template <typename Scalar>
struct NetworkT {
  // Per-sample input shape, without the batch axis.
  Shape input_shape;
  std::vector<LayerT<Scalar>> layers;

  template <typename To>
  NetworkT<To> cast() const {
    NetworkT<To> out{input_shape, {}};
    out.layers.reserve(layers.size());
    for (const auto& layer : layers) {
      out.layers.push_back(std::visit(
          [](const auto& l) -> LayerT<To> {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, LinearT<Scalar>> || std::is_same_v<L, ConvT<Scalar>>) {
              return l.template cast<To>();
            } else {
              return l;
            }
          },
          layer));
    }
    return out;
  }

  // Indices of layers holding weights, in order.
  std::vector<std::size_t> parameter_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (has_parameters(layers[i])) out.push_back(i);
    }
    return out;
  }
};

using Linear = LinearT<float>;
using Conv = ConvT<float>;
using Layer = LayerT<float>;
using Network = NetworkT<float>;

// Shapes flowing through the network: result[i] is the input of layer i,
// result.back() the per-sample output. Throws naming the first bad layer.
template <typename Scalar>
std::vector<Shape> infer_shapes(const NetworkT<Scalar>& net);

template <typename Scalar>
Index num_classes(const NetworkT<Scalar>& net);

// Every intermediate activation of one forward pass, kept for backward.
template <typename Scalar>
struct ForwardTrace {
  // activations[i] is the input of layer i; activations.back() the logits.
  std::vector<TensorT<Scalar>> activations;
  // Flat argmax positions (into the layer input) for MaxPool2d layers.
  std::vector<std::vector<Index>> pool_argmax;

  const TensorT<Scalar>& logits() const { return activations.back(); }
};

template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const NetworkT<Scalar>& net, const TensorT<Scalar>& batch);

// Logits of shape (B, num_classes).
template <typename Scalar>
TensorT<Scalar> forward(const NetworkT<Scalar>& net, const TensorT<Scalar>& batch);

template <typename Scalar>
struct ParamGradT {
  TensorT<Scalar> weights;
  TensorT<Scalar> bias;
};

// One entry per layer; parameterless layers hold empty tensors.
template <typename Scalar>
using GradientsT = std::vector<ParamGradT<Scalar>>;
using Gradients = GradientsT<float>;

template <typename Scalar>
GradientsT<Scalar> zeros_like_parameters(const NetworkT<Scalar>& net);

template <typename Scalar>
struct LossAndGrad {
  Scalar loss{};
  TensorT<Scalar> dlogits;
};

// Mean softmax cross-entropy over the batch and its gradient w.r.t. logits.
template <typename Scalar>
LossAndGrad<Scalar> softmax_cross_entropy(const TensorT<Scalar>& logits, std::span<const std::int32_t> labels);

template <typename Scalar>
struct BackwardResult {
  Scalar loss{};
  GradientsT<Scalar> grads;
};

template <typename Scalar>
BackwardResult<Scalar> backward(const NetworkT<Scalar>& net, const TensorT<Scalar>& batch,
                                std::span<const std::int32_t> labels);

// Predicted class per row of a logits tensor (first maximum wins).
template <typename Scalar>
std::vector<std::int32_t> argmax_rows(const TensorT<Scalar>& logits);

// Optimizers --------------------------------------------------------------

template <typename Scalar>
class OptimizerT {
 public:
  virtual ~OptimizerT() = default;
  virtual void step(NetworkT<Scalar>& net, const GradientsT<Scalar>& grads, double lr) = 0;
};

// Heavy-ball SGD with L2 weight decay folded into the gradient.
template <typename Scalar>
class SgdT final : public OptimizerT<Scalar> {
 public:
  SgdT(double momentum, double weight_decay) : momentum_(momentum), weight_decay_(weight_decay) {}
  void step(NetworkT<Scalar>& net, const GradientsT<Scalar>& grads, double lr) override;

 private:
  double momentum_;
  double weight_decay_;
  GradientsT<Scalar> velocity_;
};

// Adam with decoupled weight decay and bias correction.
template <typename Scalar>
class AdamT final : public OptimizerT<Scalar> {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-5;
    double weight_decay = 0.01;
  };
  explicit AdamT(Options options) : options_(options) {}
  void step(NetworkT<Scalar>& net, const GradientsT<Scalar>& grads, double lr) override;

 private:
  Options options_;
  std::int64_t steps_ = 0;
  GradientsT<Scalar> first_;
  GradientsT<Scalar> second_;
};

using Optimizer = OptimizerT<float>;
using Sgd = SgdT<float>;
using Adam = AdamT<float>;

// One stateless SGD-with-momentum update. `velocity` carries momentum
// between calls and is sized on first use.
template <typename Scalar>
void sgd_step(NetworkT<Scalar>& net, const GradientsT<Scalar>& grads, double lr, double momentum,
              double weight_decay, GradientsT<Scalar>& velocity);

#define PRUNEKIT_EXTERN_NETWORK(S)                                                                        \
  extern template std::string layer_name<S>(const LayerT<S>&);                                           \
  extern template Shape layer_output_shape<S>(const LayerT<S>&, const Shape&);                           \
  extern template std::vector<Shape> infer_shapes<S>(const NetworkT<S>&);                                \
  extern template Index num_classes<S>(const NetworkT<S>&);                                              \
  extern template ForwardTrace<S> forward_trace<S>(const NetworkT<S>&, const TensorT<S>&);               \
  extern template TensorT<S> forward<S>(const NetworkT<S>&, const TensorT<S>&);                          \
  extern template GradientsT<S> zeros_like_parameters<S>(const NetworkT<S>&);                            \
  extern template LossAndGrad<S> softmax_cross_entropy<S>(const TensorT<S>&,                             \
                                                          std::span<const std::int32_t>);                \
  extern template BackwardResult<S> backward<S>(const NetworkT<S>&, const TensorT<S>&,                   \
                                                std::span<const std::int32_t>);                          \
  extern template std::vector<std::int32_t> argmax_rows<S>(const TensorT<S>&);                           \
  extern template void sgd_step<S>(NetworkT<S>&, const GradientsT<S>&, double, double, double,           \
                                   GradientsT<S>&);                                                      \
  extern template class SgdT<S>;                                                                         \
  extern template class AdamT<S>;

PRUNEKIT_EXTERN_NETWORK(float)
PRUNEKIT_EXTERN_NETWORK(double)
#undef PRUNEKIT_EXTERN_NETWORK

}  // namespace prunekit

#endif  // PRUNEKIT_NETWORK_HPP
