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

#ifndef PRUNEKIT_TEST_SUPPORT_HPP
#define PRUNEKIT_TEST_SUPPORT_HPP

// Independent reference implementations used as oracles by the unit and
// acceptance tests. Everything here is written with plain loops and must not
// call into the code paths it is checking.

#include "prunekit/budget.hpp"
#include "prunekit/models.hpp"
#include "prunekit/network.hpp"
#include "prunekit/sparsity.hpp"
#include "prunekit/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <type_traits>
#include <variant>

namespace prunekit::testing {

inline Index uniform_int(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

template <typename Scalar>
TensorT<Scalar> random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  TensorT<Scalar> t(shape);
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.values()) v = static_cast<Scalar>(d(rng));
  return t;
}

template <typename Scalar>
LinearT<Scalar> linear_layer(Index in, Index out) {
  return {TensorT<Scalar>({in, out}), TensorT<Scalar>({out})};
}

template <typename Scalar>
ConvT<Scalar> conv_layer(Index in, Index out, Index k, Index stride, Index padding) {
  return {TensorT<Scalar>({out, in, k, k}), TensorT<Scalar>({out}), stride, padding};
}

// Small mixed networks for gradient checks: MLPs, single and double conv
// stacks, with and without pooling, GAP or spatial flatten heads.
template <typename Scalar>
NetworkT<Scalar> random_small_network(std::mt19937_64& rng, Index max_params = 200) {
  for (;;) {
    NetworkT<Scalar> net;
    const Index classes = uniform_int(rng, 2, 4);
    const Index kind = uniform_int(rng, 0, 2);
    if (kind == 0) {
      Index width = uniform_int(rng, 2, 6);
      net.input_shape = {width};
      const Index hidden = uniform_int(rng, 1, 2);
      for (Index h = 0; h < hidden; ++h) {
        const Index next = uniform_int(rng, 2, 6);
        net.layers.emplace_back(linear_layer<Scalar>(width, next));
        net.layers.emplace_back(ReLU{});
        width = next;
      }
      net.layers.emplace_back(linear_layer<Scalar>(width, classes));
    } else {
      const Index c = uniform_int(rng, 1, 2);
      Index h = uniform_int(rng, 4, 6);
      net.input_shape = {c, h, h};
      Index channels = c;
      const Index convs = kind;  // 1 or 2
      for (Index i = 0; i < convs; ++i) {
        const Index k = uniform_int(rng, 2, 3);
        const Index pad = uniform_int(rng, 0, 1);
        const Index stride = (i == 0 && uniform_int(rng, 0, 3) == 0) ? 2 : 1;
        const Index out = uniform_int(rng, 2, 3);
        net.layers.emplace_back(conv_layer<Scalar>(channels, out, k, stride, pad));
        net.layers.emplace_back(ReLU{});
        h = (h + 2 * pad - k) / stride + 1;
        channels = out;
        if (h >= 2 && uniform_int(rng, 0, 1) == 1) {
          net.layers.emplace_back(MaxPool2d{2});
          h /= 2;
        }
      }
      if (h < 1) continue;
      if (uniform_int(rng, 0, 1) == 1) {
        net.layers.emplace_back(GlobalAvgPool{});
        net.layers.emplace_back(Flatten{});
        net.layers.emplace_back(linear_layer<Scalar>(channels, classes));
      } else {
        net.layers.emplace_back(Flatten{});
        net.layers.emplace_back(linear_layer<Scalar>(channels * h * h, classes));
      }
    }
    try {
      infer_shapes(net);
    } catch (const std::exception&) {
      continue;
    }
    if (count_params(net).total > max_params) continue;
    initialize(net, rng);
    return net;
  }
}

// Networks surgery can handle: no spatial flatten (GAP head), sizes large
// enough that pruning leaves something behind.
inline Network random_surgery_network(std::mt19937_64& rng) {
  Network net;
  const Index classes = uniform_int(rng, 2, 10);
  if (uniform_int(rng, 0, 1) == 0) {
    Index width = uniform_int(rng, 8, 64);
    net.input_shape = {width};
    const Index hidden = uniform_int(rng, 1, 3);
    for (Index h = 0; h < hidden; ++h) {
      const Index next = uniform_int(rng, 4, 48);
      net.layers.emplace_back(linear_layer<float>(width, next));
      net.layers.emplace_back(ReLU{});
      width = next;
    }
    net.layers.emplace_back(linear_layer<float>(width, classes));
  } else {
    Index channels = uniform_int(rng, 1, 4);
    Index h = uniform_int(rng, 6, 12);
    net.input_shape = {channels, h, h};
    const Index convs = uniform_int(rng, 1, 3);
    for (Index i = 0; i < convs; ++i) {
      const Index out = uniform_int(rng, 3, 12);
      const Index stride = uniform_int(rng, 0, 4) == 0 ? 2 : 1;
      net.layers.emplace_back(conv_layer<float>(channels, out, 3, stride, 1));
      net.layers.emplace_back(ReLU{});
      h = (h + 2 - 3) / stride + 1;
      channels = out;
      if (h >= 4 && uniform_int(rng, 0, 1) == 1) {
        net.layers.emplace_back(MaxPool2d{2});
        h /= 2;
      }
    }
    net.layers.emplace_back(GlobalAvgPool{});
    net.layers.emplace_back(Flatten{});
    if (uniform_int(rng, 0, 1) == 1) {
      const Index hidden = uniform_int(rng, 4, 16);
      net.layers.emplace_back(linear_layer<float>(channels, hidden));
      net.layers.emplace_back(ReLU{});
      channels = hidden;
    }
    net.layers.emplace_back(linear_layer<float>(channels, classes));
  }
  initialize(net, rng);
  return net;
}

// ---- loop reference forward pass (double) ----

inline std::vector<double> ref_linear(const LinearT<double>& l, const std::vector<double>& x) {
  const Index m = l.in_features(), n = l.out_features();
  std::vector<double> y(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    double acc = l.bias[j];
    for (Index i = 0; i < m; ++i) acc += x[static_cast<std::size_t>(i)] * l.weights[i * n + j];
    y[static_cast<std::size_t>(j)] = acc;
  }
  return y;
}

inline std::vector<double> ref_conv(const ConvT<double>& c, const std::vector<double>& x, Shape& shape) {
  const Index ci = shape[0], h = shape[1], w = shape[2];
  const Index co = c.out_channels(), kh = c.kernel_h(), kw = c.kernel_w();
  const Index oh = (h + 2 * c.padding - kh) / c.stride + 1, ow = (w + 2 * c.padding - kw) / c.stride + 1;
  std::vector<double> y(static_cast<std::size_t>(co * oh * ow));
  for (Index o = 0; o < co; ++o) {
    for (Index oy = 0; oy < oh; ++oy) {
      for (Index ox = 0; ox < ow; ++ox) {
        double acc = c.bias[o];
        for (Index i = 0; i < ci; ++i) {
          for (Index ky = 0; ky < kh; ++ky) {
            for (Index kx = 0; kx < kw; ++kx) {
              const Index iy = oy * c.stride - c.padding + ky, ix = ox * c.stride - c.padding + kx;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              acc += c.weights[((o * ci + i) * kh + ky) * kw + kx] * x[static_cast<std::size_t>((i * h + iy) * w + ix)];
            }
          }
        }
        y[static_cast<std::size_t>((o * oh + oy) * ow + ox)] = acc;
      }
    }
  }
  shape = {co, oh, ow};
  return y;
}

inline std::vector<double> ref_maxpool(Index k, const std::vector<double>& x, Shape& shape) {
  const Index c = shape[0], h = shape[1], w = shape[2], oh = h / k, ow = w / k;
  std::vector<double> y(static_cast<std::size_t>(c * oh * ow));
  for (Index ch = 0; ch < c; ++ch) {
    for (Index oy = 0; oy < oh; ++oy) {
      for (Index ox = 0; ox < ow; ++ox) {
        double best = -INFINITY;
        for (Index dy = 0; dy < k; ++dy) {
          for (Index dx = 0; dx < k; ++dx) {
            best = std::max(best, x[static_cast<std::size_t>((ch * h + oy * k + dy) * w + ox * k + dx)]);
          }
        }
        y[static_cast<std::size_t>((ch * oh + oy) * ow + ox)] = best;
      }
    }
  }
  shape = {c, oh, ow};
  return y;
}

inline std::vector<double> ref_gap(const std::vector<double>& x, Shape& shape) {
  const Index c = shape[0], area = shape[1] * shape[2];
  std::vector<double> y(static_cast<std::size_t>(c));
  for (Index ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (Index a = 0; a < area; ++a) s += x[static_cast<std::size_t>(ch * area + a)];
    y[static_cast<std::size_t>(ch)] = s / static_cast<double>(area);
  }
  shape = {c, 1, 1};
  return y;
}

inline TensorT<double> reference_forward(const NetworkT<double>& net, const TensorT<double>& batch) {
  const Index n = batch.dim(0), f = batch.size() / n;
  std::vector<std::vector<double>> outs;
  Shape out_shape;
  for (Index b = 0; b < n; ++b) {
    std::vector<double> x(batch.data() + b * f, batch.data() + (b + 1) * f);
    Shape shape = net.input_shape;
    for (const auto& layer : net.layers) {
      if (const auto* l = std::get_if<LinearT<double>>(&layer)) {
        x = ref_linear(*l, x);
        shape = {l->out_features()};
      } else if (const auto* c = std::get_if<ConvT<double>>(&layer)) {
        x = ref_conv(*c, x, shape);
      } else if (std::holds_alternative<ReLU>(layer)) {
        for (auto& v : x) v = v > 0.0 ? v : 0.0;
      } else if (const auto* p = std::get_if<MaxPool2d>(&layer)) {
        x = ref_maxpool(p->kernel, x, shape);
      } else if (std::holds_alternative<GlobalAvgPool>(layer)) {
        x = ref_gap(x, shape);
      } else {
        shape = {static_cast<Index>(x.size())};
      }
    }
    outs.push_back(std::move(x));
    out_shape = shape;
  }
  Shape full{n};
  full.insert(full.end(), out_shape.begin(), out_shape.end());
  TensorT<double> out(full);
  for (Index b = 0; b < n; ++b) {
    std::copy(outs[static_cast<std::size_t>(b)].begin(), outs[static_cast<std::size_t>(b)].end(),
              out.data() + b * (out.size() / n));
  }
  return out;
}

// ---- finite differences ----

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error_small = 0.0;  // where both gradients are tiny
  Index checked = 0;
  Index skipped_kinks = 0;
};

inline double mean_loss(const NetworkT<double>& net, const TensorT<double>& x, const std::vector<std::int32_t>& y) {
  return softmax_cross_entropy(forward(net, x), y).loss;
}

// Activation pattern: ReLU signs and pool winners. A coordinate whose
// +eps/-eps perturbation changes the pattern straddles a kink and is skipped.
inline std::vector<std::vector<Index>> activation_pattern(const NetworkT<double>& net, const TensorT<double>& x) {
  const auto trace = forward_trace(net, x);
  std::vector<std::vector<Index>> pattern;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (std::holds_alternative<ReLU>(net.layers[i])) {
      const auto& pre = trace.activations[i];
      std::vector<Index> signs(static_cast<std::size_t>(pre.size()));
      for (Index k = 0; k < pre.size(); ++k) signs[static_cast<std::size_t>(k)] = pre[k] > 0.0;
      pattern.push_back(std::move(signs));
    } else if (std::holds_alternative<MaxPool2d>(net.layers[i])) {
      pattern.push_back(trace.pool_argmax[i]);
    }
  }
  return pattern;
}

inline GradCheckResult check_gradients(NetworkT<double> net, const TensorT<double>& x,
                                       const std::vector<std::int32_t>& y, double eps = 1e-6,
                                       double tiny = 1e-7) {
  GradCheckResult r;
  const auto analytic = backward(net, x, y).grads;
  const auto base_pattern = activation_pattern(net, x);
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    auto visit_param = [&](TensorT<double>& param, const TensorT<double>& grad) {
      for (Index k = 0; k < param.size(); ++k) {
        const double orig = param[k];
        param[k] = orig + eps;
        const double plus = mean_loss(net, x, y);
        const bool kink_plus = activation_pattern(net, x) != base_pattern;
        param[k] = orig - eps;
        const double minus = mean_loss(net, x, y);
        const bool kink_minus = activation_pattern(net, x) != base_pattern;
        param[k] = orig;
        if (kink_plus || kink_minus) {
          ++r.skipped_kinks;
          continue;
        }
        const double fd = (plus - minus) / (2.0 * eps);
        const double g = grad[k];
        const double scale = std::max(std::abs(g), std::abs(fd));
        if (scale < tiny) {
          r.max_absolute_error_small = std::max(r.max_absolute_error_small, std::abs(g - fd));
        } else {
          r.max_relative_error = std::max(r.max_relative_error, std::abs(g - fd) / scale);
        }
        ++r.checked;
      }
    };
    if (auto* l = std::get_if<LinearT<double>>(&net.layers[li])) {
      visit_param(l->weights, analytic[li].weights);
      visit_param(l->bias, analytic[li].bias);
    } else if (auto* c = std::get_if<ConvT<double>>(&net.layers[li])) {
      visit_param(c->weights, analytic[li].weights);
      visit_param(c->bias, analytic[li].bias);
    }
  }
  return r;
}

// ---- masked vs shrunk ----

// Samples restricted to the surviving input features.
inline Tensor select_features(const Tensor& batch, const ShrunkNetwork& shrunk) {
  const Index n = batch.dim(0);
  Shape shape{n};
  shape.insert(shape.end(), shrunk.net.input_shape.begin(), shrunk.net.input_shape.end());
  Tensor out(shape);
  const Index full = batch.size() / n, kept = out.size() / n;
  if (shrunk.feature_kind == FeatureKind::Flat) {
    for (Index b = 0; b < n; ++b) {
      for (std::size_t j = 0; j < shrunk.kept_features.size(); ++j) {
        out[b * kept + static_cast<Index>(j)] = batch[b * full + shrunk.kept_features[j]];
      }
    }
  } else {
    const Index area = shrunk.original_input_shape[1] * shrunk.original_input_shape[2];
    for (Index b = 0; b < n; ++b) {
      for (std::size_t j = 0; j < shrunk.kept_features.size(); ++j) {
        std::copy_n(batch.data() + b * full + shrunk.kept_features[j] * area, area,
                    out.data() + b * kept + static_cast<Index>(j) * area);
      }
    }
  }
  return out;
}

struct EquivalenceResult {
  double max_relative_diff = 0.0;
  Index argmax_mismatches = 0;
};

inline EquivalenceResult compare_outputs(const Tensor& masked, const Tensor& shrunk) {
  EquivalenceResult r;
  const Index n = masked.dim(0), k = masked.size() / n;
  for (Index b = 0; b < n; ++b) {
    double diff = 0.0, ref = 0.0;
    Index am = 0, as = 0;
    for (Index j = 0; j < k; ++j) {
      const double a = masked[b * k + j], s = shrunk[b * k + j];
      diff = std::max(diff, std::abs(a - s));
      ref = std::max(ref, std::abs(a));
      if (a > masked[b * k + am]) am = j;
      if (s > shrunk[b * k + as]) as = j;
    }
    r.max_relative_diff = std::max(r.max_relative_diff, diff / std::max(ref, 1e-30));
    r.argmax_mismatches += am != as;
  }
  return r;
}

// ---- brute-force budget counting ----

struct BruteCounts {
  std::int64_t params = 0, params_nonzero = 0, flops = 0, flops_nonzero = 0;
};

// Walks every parameter entry, and every individual multiply-accumulate of
// every output element, one at a time.
inline BruteCounts brute_force_counts(const Network& net) {
  BruteCounts c;
  Shape shape = net.input_shape;
  for (const auto& layer : net.layers) {
    if (const auto* l = std::get_if<Linear>(&layer)) {
      for (Index k = 0; k < l->weights.size(); ++k) {
        ++c.params;
        c.params_nonzero += l->weights[k] != 0.0f;
      }
      for (Index k = 0; k < l->bias.size(); ++k) {
        ++c.params;
        c.params_nonzero += l->bias[k] != 0.0f;
      }
      for (Index j = 0; j < l->out_features(); ++j) {
        for (Index i = 0; i < l->in_features(); ++i) {
          ++c.flops;
          c.flops_nonzero += l->weights[i * l->out_features() + j] != 0.0f;
        }
      }
      shape = {l->out_features()};
    } else if (const auto* cv = std::get_if<Conv>(&layer)) {
      for (Index k = 0; k < cv->weights.size(); ++k) {
        ++c.params;
        c.params_nonzero += cv->weights[k] != 0.0f;
      }
      for (Index k = 0; k < cv->bias.size(); ++k) {
        ++c.params;
        c.params_nonzero += cv->bias[k] != 0.0f;
      }
      const Index oh = (shape[1] + 2 * cv->padding - cv->kernel_h()) / cv->stride + 1;
      const Index ow = (shape[2] + 2 * cv->padding - cv->kernel_w()) / cv->stride + 1;
      for (Index o = 0; o < cv->out_channels(); ++o) {
        for (Index p = 0; p < oh * ow; ++p) {
          for (Index i = 0; i < cv->in_channels(); ++i) {
            for (Index t = 0; t < cv->kernel_area(); ++t) {
              ++c.flops;
              c.flops_nonzero += cv->weights[(o * cv->in_channels() + i) * cv->kernel_area() + t] != 0.0f;
            }
          }
        }
      }
      shape = {cv->out_channels(), oh, ow};
    } else if (const auto* p = std::get_if<MaxPool2d>(&layer)) {
      shape = {shape[0], shape[1] / p->kernel, shape[2] / p->kernel};
    } else if (std::holds_alternative<GlobalAvgPool>(layer)) {
      shape = {shape[0], 1, 1};
    } else if (std::holds_alternative<Flatten>(layer)) {
      shape = {shape_size(shape)};
    }
  }
  return c;
}

}  // namespace prunekit::testing

#endif  // PRUNEKIT_TEST_SUPPORT_HPP
