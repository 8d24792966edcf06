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

#include "prunekit/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace prunekit {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void shape_error(std::size_t layer, const std::string& name, const std::string& what) {
  throw std::invalid_argument("layer " + std::to_string(layer) + " (" + name + "): " + what);
}

Index conv_out_extent(Index in, Index kernel, Index stride, Index padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

// Unfold one (C, H, W) sample into (C*Kh*Kw, Ho*Wo) patch columns.
template <typename Scalar>
void im2col(const Scalar* x, Index channels, Index height, Index width, Index kh, Index kw, Index stride,
            Index padding, Index out_h, Index out_w, RowMatrix<Scalar>& cols) {
  cols.resize(channels * kh * kw, out_h * out_w);
  for (Index c = 0; c < channels; ++c) {
    const Scalar* plane = x + c * height * width;
    for (Index ky = 0; ky < kh; ++ky) {
      for (Index kx = 0; kx < kw; ++kx) {
        Scalar* row = cols.data() + ((c * kh + ky) * kw + kx) * out_h * out_w;
        // Output columns whose input column lies inside the image.
        const Index lo = std::clamp<Index>((padding - kx + stride - 1) / stride, 0, out_w);
        const Index hi = std::clamp<Index>((width + padding - kx + stride - 1) / stride, lo, out_w);
        for (Index oy = 0; oy < out_h; ++oy) {
          const Index iy = oy * stride - padding + ky;
          Scalar* dst = row + oy * out_w;
          if (iy < 0 || iy >= height) {
            std::fill(dst, dst + out_w, Scalar(0));
            continue;
          }
          const Scalar* src = plane + iy * width - padding + kx;
          std::fill(dst, dst + lo, Scalar(0));
          if (stride == 1) {
            std::copy(src + lo, src + hi, dst + lo);
          } else {
            for (Index ox = lo; ox < hi; ++ox) dst[ox] = src[ox * stride];
          }
          std::fill(dst + hi, dst + out_w, Scalar(0));
        }
      }
    }
  }
}

template <typename Scalar>
void col2im(const RowMatrix<Scalar>& cols, Index channels, Index height, Index width, Index kh, Index kw,
            Index stride, Index padding, Index out_h, Index out_w, Scalar* dx) {
  for (Index c = 0; c < channels; ++c) {
    Scalar* plane = dx + c * height * width;
    for (Index ky = 0; ky < kh; ++ky) {
      for (Index kx = 0; kx < kw; ++kx) {
        const Scalar* row = cols.data() + ((c * kh + ky) * kw + kx) * out_h * out_w;
        const Index lo = std::clamp<Index>((padding - kx + stride - 1) / stride, 0, out_w);
        const Index hi = std::clamp<Index>((width + padding - kx + stride - 1) / stride, lo, out_w);
        for (Index oy = 0; oy < out_h; ++oy) {
          const Index iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= height) continue;
          const Scalar* src = row + oy * out_w;
          Scalar* dst = plane + iy * width - padding + kx;
          for (Index ox = lo; ox < hi; ++ox) dst[ox * stride] += src[ox];
        }
      }
    }
  }
}

Shape with_batch(Index batch, const Shape& sample) {
  Shape out{batch};
  out.insert(out.end(), sample.begin(), sample.end());
  return out;
}

template <typename Scalar>
TensorT<Scalar> linear_forward(const LinearT<Scalar>& layer, const TensorT<Scalar>& x) {
  const Index batch = x.dim(0);
  TensorT<Scalar> y(Shape{batch, layer.out_features()});
  auto out = y.matrix(batch, layer.out_features());
  out.noalias() = x.matrix(batch, layer.in_features()) * layer.weights.matrix();
  out.rowwise() += layer.bias.vec().transpose();
  return y;
}

template <typename Scalar>
TensorT<Scalar> conv_forward(const ConvT<Scalar>& layer, const TensorT<Scalar>& x) {
  const Index batch = x.dim(0), channels = x.dim(1), height = x.dim(2), width = x.dim(3);
  const Index out_h = conv_out_extent(height, layer.kernel_h(), layer.stride, layer.padding);
  const Index out_w = conv_out_extent(width, layer.kernel_w(), layer.stride, layer.padding);
  const Index oc = layer.out_channels();
  TensorT<Scalar> y(Shape{batch, oc, out_h, out_w});
  const auto w = layer.weights.matrix(oc, channels * layer.kernel_area());
  RowMatrix<Scalar> cols;
  const Index in_stride = channels * height * width;
  const Index out_stride = oc * out_h * out_w;
  for (Index b = 0; b < batch; ++b) {
    im2col(x.data() + b * in_stride, channels, height, width, layer.kernel_h(), layer.kernel_w(), layer.stride,
           layer.padding, out_h, out_w, cols);
    MatrixMap<Scalar> out(y.data() + b * out_stride, oc, out_h * out_w);
    out.noalias() = w * cols;
    out.colwise() += layer.bias.vec();
  }
  return y;
}

template <typename Scalar>
TensorT<Scalar> maxpool_forward(const MaxPool2d& pool, const TensorT<Scalar>& x, std::vector<Index>& argmax) {
  const Index batch = x.dim(0), channels = x.dim(1), height = x.dim(2), width = x.dim(3);
  const Index k = pool.kernel;
  const Index out_h = height / k, out_w = width / k;
  TensorT<Scalar> y(Shape{batch, channels, out_h, out_w});
  argmax.assign(static_cast<std::size_t>(y.size()), 0);
  Index o = 0;
  for (Index plane = 0; plane < batch * channels; ++plane) {
    const Index base = plane * height * width;
    for (Index oy = 0; oy < out_h; ++oy) {
      for (Index ox = 0; ox < out_w; ++ox, ++o) {
        Index best = base + (oy * k) * width + ox * k;
        for (Index dy = 0; dy < k; ++dy) {
          for (Index dx = 0; dx < k; ++dx) {
            const Index idx = base + (oy * k + dy) * width + ox * k + dx;
            if (x[idx] > x[best]) best = idx;
          }
        }
        y[o] = x[best];
        argmax[static_cast<std::size_t>(o)] = best;
      }
    }
  }
  return y;
}

template <typename Scalar>
TensorT<Scalar> global_avg_pool_forward(const TensorT<Scalar>& x) {
  const Index batch = x.dim(0), channels = x.dim(1);
  const Index area = x.dim(2) * x.dim(3);
  TensorT<Scalar> y(Shape{batch, channels, 1, 1});
  y.vec() = x.matrix(batch * channels, area).rowwise().sum() / static_cast<Scalar>(area);
  return y;
}

}  // namespace

template <typename Scalar>
std::string layer_name(const LayerT<Scalar>& layer) {
  return std::visit(Overloaded{
                        [](const LinearT<Scalar>& l) {
                          return "Linear " + std::to_string(l.in_features()) + "->" +
                                 std::to_string(l.out_features());
                        },
                        [](const ConvT<Scalar>& c) {
                          return "Conv " + std::to_string(c.in_channels()) + "->" +
                                 std::to_string(c.out_channels()) + " k" + std::to_string(c.kernel_h()) + "x" +
                                 std::to_string(c.kernel_w());
                        },
                        [](const ReLU&) { return std::string("ReLU"); },
                        [](const MaxPool2d& p) { return "MaxPool2d " + std::to_string(p.kernel); },
                        [](const GlobalAvgPool&) { return std::string("GlobalAvgPool"); },
                        [](const Flatten&) { return std::string("Flatten"); },
                    },
                    layer);
}

template <typename Scalar>
Shape layer_output_shape(const LayerT<Scalar>& layer, const Shape& in) {
  return std::visit(
      Overloaded{
          [&](const LinearT<Scalar>& l) -> Shape {
            if (l.weights.rank() != 2 || l.bias.rank() != 1 || l.bias.dim(0) != l.out_features()) {
              throw std::invalid_argument("malformed linear parameters");
            }
            if (in.size() != 1 || in[0] != l.in_features()) {
              throw std::invalid_argument("expected input (" + std::to_string(l.in_features()) + "), got " +
                                          to_string(in));
            }
            return {l.out_features()};
          },
          [&](const ConvT<Scalar>& c) -> Shape {
            if (c.weights.rank() != 4 || c.bias.rank() != 1 || c.bias.dim(0) != c.out_channels()) {
              throw std::invalid_argument("malformed conv parameters");
            }
            if (c.stride < 1 || c.padding < 0) throw std::invalid_argument("bad stride/padding");
            if (in.size() != 3 || in[0] != c.in_channels()) {
              throw std::invalid_argument("expected input with " + std::to_string(c.in_channels()) +
                                          " channels, got " + to_string(in));
            }
            const Index h = conv_out_extent(in[1], c.kernel_h(), c.stride, c.padding);
            const Index w = conv_out_extent(in[2], c.kernel_w(), c.stride, c.padding);
            if (h < 1 || w < 1) throw std::invalid_argument("kernel larger than padded input " + to_string(in));
            return {c.out_channels(), h, w};
          },
          [&](const ReLU&) -> Shape { return in; },
          [&](const MaxPool2d& p) -> Shape {
            if (in.size() != 3 || p.kernel < 1 || in[1] < p.kernel || in[2] < p.kernel) {
              throw std::invalid_argument("cannot pool " + to_string(in));
            }
            return {in[0], in[1] / p.kernel, in[2] / p.kernel};
          },
          [&](const GlobalAvgPool&) -> Shape {
            if (in.size() != 3) throw std::invalid_argument("expected (C,H,W), got " + to_string(in));
            return {in[0], 1, 1};
          },
          [&](const Flatten&) -> Shape { return {shape_size(in)}; },
      },
      layer);
}

template <typename Scalar>
std::vector<Shape> infer_shapes(const NetworkT<Scalar>& net) {
  std::vector<Shape> shapes{net.input_shape};
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    try {
      shapes.push_back(layer_output_shape(net.layers[i], shapes.back()));
    } catch (const std::invalid_argument& e) {
      shape_error(i, layer_name(net.layers[i]), e.what());
    }
  }
  return shapes;
}

template <typename Scalar>
Index num_classes(const NetworkT<Scalar>& net) {
  const Shape out = infer_shapes(net).back();
  if (out.size() != 1) throw std::invalid_argument("network output is not a vector: " + to_string(out));
  return out[0];
}

template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const NetworkT<Scalar>& net, const TensorT<Scalar>& batch) {
  if (batch.rank() < 1 || batch.dim(0) < 1) throw std::invalid_argument("empty batch");
  const Shape sample(batch.shape().begin() + 1, batch.shape().end());
  if (sample != net.input_shape) {
    shape_error(0, net.layers.empty() ? "input" : layer_name(net.layers.front()),
                "batch sample shape " + to_string(sample) + " does not match network input " +
                    to_string(net.input_shape));
  }
  const auto shapes = infer_shapes(net);
  const Index n = batch.dim(0);

  ForwardTrace<Scalar> trace;
  trace.activations.reserve(net.layers.size() + 1);
  trace.pool_argmax.resize(net.layers.size());
  trace.activations.push_back(batch);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const TensorT<Scalar>& x = trace.activations.back();
    TensorT<Scalar> y = std::visit(
        Overloaded{
            [&](const LinearT<Scalar>& l) { return linear_forward(l, x); },
            [&](const ConvT<Scalar>& c) { return conv_forward(c, x); },
            [&](const ReLU&) { return TensorT<Scalar>(x.shape(), x.vec().cwiseMax(Scalar(0))); },
            [&](const MaxPool2d& p) { return maxpool_forward(p, x, trace.pool_argmax[i]); },
            [&](const GlobalAvgPool&) { return global_avg_pool_forward(x); },
            [&](const Flatten&) { return x.reshaped(with_batch(n, shapes[i + 1])); },
        },
        net.layers[i]);
    if (!y.all_finite()) shape_error(i, layer_name(net.layers[i]), "produced non-finite values");
    trace.activations.push_back(std::move(y));
  }
  return trace;
}

template <typename Scalar>
TensorT<Scalar> forward(const NetworkT<Scalar>& net, const TensorT<Scalar>& batch) {
  auto trace = forward_trace(net, batch);
  return std::move(trace.activations.back());
}

template <typename Scalar>
GradientsT<Scalar> zeros_like_parameters(const NetworkT<Scalar>& net) {
  GradientsT<Scalar> grads(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (const auto* l = std::get_if<LinearT<Scalar>>(&net.layers[i])) {
      grads[i] = {TensorT<Scalar>(l->weights.shape()), TensorT<Scalar>(l->bias.shape())};
    } else if (const auto* c = std::get_if<ConvT<Scalar>>(&net.layers[i])) {
      grads[i] = {TensorT<Scalar>(c->weights.shape()), TensorT<Scalar>(c->bias.shape())};
    }
  }
  return grads;
}

template <typename Scalar>
LossAndGrad<Scalar> softmax_cross_entropy(const TensorT<Scalar>& logits, std::span<const std::int32_t> labels) {
  if (logits.rank() != 2) throw std::invalid_argument("logits must be (B, C)");
  const Index batch = logits.dim(0), classes = logits.dim(1);
  if (static_cast<Index>(labels.size()) != batch) {
    throw std::invalid_argument("got " + std::to_string(labels.size()) + " labels for a batch of " +
                                std::to_string(batch));
  }
  LossAndGrad<Scalar> out{Scalar(0), TensorT<Scalar>(logits.shape())};
  const auto z = logits.matrix(batch, classes);
  auto g = out.dlogits.matrix(batch, classes);
  double total = 0.0;
  for (Index b = 0; b < batch; ++b) {
    const std::int32_t label = labels[static_cast<std::size_t>(b)];
    if (label < 0 || label >= classes) {
      throw std::out_of_range("label " + std::to_string(label) + " at batch row " + std::to_string(b) +
                              " outside [0, " + std::to_string(classes) + ")");
    }
    const Scalar peak = z.row(b).maxCoeff();
    const auto shifted = (z.row(b).array() - peak).eval();
    const auto e = shifted.exp().eval();
    const Scalar sum = e.sum();
    total += static_cast<double>(std::log(sum) - shifted(label));
    g.row(b) = e / sum;
    g(b, label) -= Scalar(1);
  }
  g /= static_cast<Scalar>(batch);
  out.loss = static_cast<Scalar>(total / static_cast<double>(batch));
  if (!std::isfinite(static_cast<double>(out.loss))) throw std::runtime_error("non-finite loss");
  return out;
}

template <typename Scalar>
BackwardResult<Scalar> backward(const NetworkT<Scalar>& net, const TensorT<Scalar>& batch,
                                std::span<const std::int32_t> labels) {
  const ForwardTrace<Scalar> trace = forward_trace(net, batch);
  auto [loss, grad] = softmax_cross_entropy(trace.logits(), labels);
  BackwardResult<Scalar> result{loss, zeros_like_parameters(net)};
  const Index n = batch.dim(0);

  for (std::size_t step = net.layers.size(); step-- > 0;) {
    const TensorT<Scalar>& x = trace.activations[step];
    const bool need_input_grad = step > 0;
    TensorT<Scalar> dx;
    std::visit(
        Overloaded{
            [&](const LinearT<Scalar>& l) {
              const auto dy = grad.matrix(n, l.out_features());
              const auto xin = x.matrix(n, l.in_features());
              auto& g = result.grads[step];
              g.weights.matrix().noalias() = xin.transpose() * dy;
              g.bias.vec() = dy.colwise().sum().transpose();
              if (need_input_grad) {
                dx = TensorT<Scalar>(x.shape());
                dx.matrix(n, l.in_features()).noalias() = dy * l.weights.matrix().transpose();
              }
            },
            [&](const ConvT<Scalar>& c) {
              const Index channels = x.dim(1), height = x.dim(2), width = x.dim(3);
              const Index oc = c.out_channels();
              const Index out_h = grad.dim(2), out_w = grad.dim(3);
              const Index patch = channels * c.kernel_area();
              auto& g = result.grads[step];
              auto dw = g.weights.matrix(oc, patch);
              const auto w = c.weights.matrix(oc, patch);
              if (need_input_grad) dx = TensorT<Scalar>(x.shape());
              RowMatrix<Scalar> cols, dcols;
              for (Index b = 0; b < n; ++b) {
                ConstMatrixMap<Scalar> dy(grad.data() + b * oc * out_h * out_w, oc, out_h * out_w);
                im2col(x.data() + b * channels * height * width, channels, height, width, c.kernel_h(),
                       c.kernel_w(), c.stride, c.padding, out_h, out_w, cols);
                dw.noalias() += dy * cols.transpose();
                g.bias.vec() += dy.rowwise().sum();
                if (need_input_grad) {
                  dcols.noalias() = w.transpose() * dy;
                  col2im(dcols, channels, height, width, c.kernel_h(), c.kernel_w(), c.stride, c.padding, out_h,
                         out_w, dx.data() + b * channels * height * width);
                }
              }
            },
            [&](const ReLU&) {
              if (!need_input_grad) return;
              dx = TensorT<Scalar>(x.shape(), (x.vec().array() > Scalar(0)).select(grad.vec(), Scalar(0)));
            },
            [&](const MaxPool2d&) {
              if (!need_input_grad) return;
              dx = TensorT<Scalar>(x.shape());
              const auto& argmax = trace.pool_argmax[step];
              for (std::size_t o = 0; o < argmax.size(); ++o) dx[argmax[o]] += grad[static_cast<Index>(o)];
            },
            [&](const GlobalAvgPool&) {
              if (!need_input_grad) return;
              const Index planes = x.dim(0) * x.dim(1), area = x.dim(2) * x.dim(3);
              dx = TensorT<Scalar>(x.shape());
              dx.matrix(planes, area).colwise() = grad.vec() / static_cast<Scalar>(area);
            },
            [&](const Flatten&) {
              if (need_input_grad) dx = grad.reshaped(x.shape());
            },
        },
        net.layers[step]);
    if (need_input_grad) grad = std::move(dx);
  }
  return result;
}

template <typename Scalar>
std::vector<std::int32_t> argmax_rows(const TensorT<Scalar>& logits) {
  const Index rows = logits.dim(0), cols = logits.size() / logits.dim(0);
  const auto m = logits.matrix(rows, cols);
  std::vector<std::int32_t> out(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) {
    Index best = 0;
    m.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(best);
  }
  return out;
}

namespace {

template <typename Scalar, typename Fn>
void for_each_parameter(NetworkT<Scalar>& net, Fn&& fn) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    std::visit(Overloaded{
                   [&](LinearT<Scalar>& l) {
                     fn(i, l.weights, true);
                     fn(i, l.bias, false);
                   },
                   [&](ConvT<Scalar>& c) {
                     fn(i, c.weights, true);
                     fn(i, c.bias, false);
                   },
                   [](auto&) {},
               },
               net.layers[i]);
  }
}

template <typename Scalar>
void check_grads(const NetworkT<Scalar>& net, const GradientsT<Scalar>& grads) {
  if (grads.size() != net.layers.size()) throw std::invalid_argument("gradient list does not match network");
}

}  // namespace

template <typename Scalar>
void sgd_step(NetworkT<Scalar>& net, const GradientsT<Scalar>& grads, double lr, double momentum,
              double weight_decay, GradientsT<Scalar>& velocity) {
  check_grads(net, grads);
  if (velocity.empty()) velocity = zeros_like_parameters(net);
  const auto s_lr = static_cast<Scalar>(lr), s_mom = static_cast<Scalar>(momentum),
             s_wd = static_cast<Scalar>(weight_decay);
  for_each_parameter(net, [&](std::size_t i, TensorT<Scalar>& p, bool is_weight) {
    const TensorT<Scalar>& g = is_weight ? grads[i].weights : grads[i].bias;
    TensorT<Scalar>& v = is_weight ? velocity[i].weights : velocity[i].bias;
    if (g.shape() != p.shape()) {
      throw std::invalid_argument("gradient shape " + to_string(g.shape()) + " does not match parameter " +
                                  to_string(p.shape()) + " at layer " + std::to_string(i));
    }
    v.vec() = s_mom * v.vec() + g.vec() + s_wd * p.vec();
    p.vec() -= s_lr * v.vec();
  });
}

template <typename Scalar>
void SgdT<Scalar>::step(NetworkT<Scalar>& net, const GradientsT<Scalar>& grads, double lr) {
  sgd_step(net, grads, lr, momentum_, weight_decay_, velocity_);
}

template <typename Scalar>
void AdamT<Scalar>::step(NetworkT<Scalar>& net, const GradientsT<Scalar>& grads, double lr) {
  check_grads(net, grads);
  if (first_.empty()) {
    first_ = zeros_like_parameters(net);
    second_ = zeros_like_parameters(net);
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  const auto b1 = static_cast<Scalar>(options_.beta1), b2 = static_cast<Scalar>(options_.beta2);
  const auto decay = static_cast<Scalar>(1.0 - lr * options_.weight_decay);
  const auto step_size = static_cast<Scalar>(lr / c1);
  const auto root_c2 = static_cast<Scalar>(std::sqrt(c2));
  const auto eps = static_cast<Scalar>(options_.eps);
  for_each_parameter(net, [&](std::size_t i, TensorT<Scalar>& p, bool is_weight) {
    const TensorT<Scalar>& g = is_weight ? grads[i].weights : grads[i].bias;
    auto& m = (is_weight ? first_[i].weights : first_[i].bias).vec();
    auto& v = (is_weight ? second_[i].weights : second_[i].bias).vec();
    if (g.shape() != p.shape()) {
      throw std::invalid_argument("gradient shape does not match parameter at layer " + std::to_string(i));
    }
    m = b1 * m + (Scalar(1) - b1) * g.vec();
    v = b2 * v + (Scalar(1) - b2) * g.vec().cwiseAbs2();
    p.vec() *= decay;
    p.vec().array() -= step_size * m.array() / (v.array().sqrt() / root_c2 + eps);
  });
}

#define PRUNEKIT_INSTANTIATE_NETWORK(S)                                                                     \
  template std::string layer_name<S>(const LayerT<S>&);                                                    \
  template Shape layer_output_shape<S>(const LayerT<S>&, const Shape&);                                    \
  template std::vector<Shape> infer_shapes<S>(const NetworkT<S>&);                                         \
  template Index num_classes<S>(const NetworkT<S>&);                                                       \
  template ForwardTrace<S> forward_trace<S>(const NetworkT<S>&, const TensorT<S>&);                        \
  template TensorT<S> forward<S>(const NetworkT<S>&, const TensorT<S>&);                                   \
  template GradientsT<S> zeros_like_parameters<S>(const NetworkT<S>&);                                     \
  template LossAndGrad<S> softmax_cross_entropy<S>(const TensorT<S>&, std::span<const std::int32_t>);      \
  template BackwardResult<S> backward<S>(const NetworkT<S>&, const TensorT<S>&,                            \
                                         std::span<const std::int32_t>);                                   \
  template std::vector<std::int32_t> argmax_rows<S>(const TensorT<S>&);                                    \
  template void sgd_step<S>(NetworkT<S>&, const GradientsT<S>&, double, double, double, GradientsT<S>&);   \
  template class SgdT<S>;                                                                                  \
  template class AdamT<S>;

PRUNEKIT_INSTANTIATE_NETWORK(float)
PRUNEKIT_INSTANTIATE_NETWORK(double)

}  // namespace prunekit
