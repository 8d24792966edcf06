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

#include "prunekit/models.hpp"
#include "prunekit/network.hpp"
#include "prunekit/schedule.hpp"
#include "support/test_support.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace prunekit;
using namespace prunekit::testing;

TEST_CASE("tensor basics") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.matrix()(1, 0) == 4);
  CHECK(t.reshaped({3, 2}).matrix()(2, 1) == 6);
  CHECK_THROWS_AS(t.reshaped({4, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor({2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), std::invalid_argument);
  CHECK(t.cast<double>().cast<float>() == t);
}

TEST_CASE("linear forward by hand") {
  Network net{{2}, {}};
  Linear l{Tensor({2, 3}, {1, 2, 3, 4, 5, 6}), Tensor({3}, {0.5f, 0, -1})};
  net.layers.emplace_back(l);
  const Tensor y = forward(net, Tensor({1, 2}, {1, -1}));
  // x W + b = [1-4, 2-5, 3-6] + b
  CHECK(y == Tensor({1, 3}, {-2.5f, -3, -4}));
}

TEST_CASE("conv forward by hand") {
  // 1x1x3x3 input, one 2x2 filter of ones, no padding: sums of 2x2 windows.
  Network net{{1, 3, 3}, {}};
  net.layers.emplace_back(Conv{Tensor::constant({1, 1, 2, 2}, 1.0f), Tensor({1}, {1.0f}), 1, 0});
  const Tensor y = forward(net, Tensor({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
  CHECK(y == Tensor({1, 1, 2, 2}, {13, 17, 25, 29}));
}

TEST_CASE("forward matches loop reference on random networks") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto net = random_small_network<double>(rng, 400);
    Shape shape{5};
    shape.insert(shape.end(), net.input_shape.begin(), net.input_shape.end());
    const auto x = random_tensor<double>(shape, rng);
    const auto ref = reference_forward(net, x);
    const auto got = forward(net, x);
    REQUIRE(got.shape() == ref.shape());
    CHECK((got.vec() - ref.vec()).cwiseAbs().maxCoeff() < 1e-12);

    const auto got32 = forward(net.cast<float>(), x.cast<float>());
    CHECK((got32.cast<double>().vec() - ref.vec()).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("batch rows are independent") {
  std::mt19937_64 rng(3);
  Network net = make_small_vgg({3, 8, 8}, {4, 6}, 5);
  initialize(net, rng);
  const Tensor x = random_tensor<float>({4, 3, 8, 8}, rng);
  const Tensor all = forward(net, x);
  for (Index b = 0; b < 4; ++b) {
    Tensor one({1, 3, 8, 8}, x.vec().segment(b * 192, 192));
    const Tensor y = forward(net, one);
    CHECK((y.vec() - all.vec().segment(b * 5, 5)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("max pool takes the first maximum on ties") {
  Network net{{1, 2, 2}, {MaxPool2d{2}}};
  const auto trace = forward_trace(net, Tensor({1, 1, 2, 2}, {3, 3, 1, 3}));
  CHECK(trace.logits()[0] == 3);
  CHECK(trace.pool_argmax[0][0] == 0);
}

TEST_CASE("gradients agree with central differences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const auto net = random_small_network<double>(rng);
    Shape shape{3};
    shape.insert(shape.end(), net.input_shape.begin(), net.input_shape.end());
    const auto x = random_tensor<double>(shape, rng);
    std::vector<std::int32_t> y;
    for (int i = 0; i < 3; ++i) y.push_back(static_cast<std::int32_t>(uniform_int(rng, 0, num_classes(net) - 1)));
    const auto r = check_gradients(net, x, y);
    CHECK(r.checked > 0);
    CHECK(r.max_relative_error < 1e-4);
    CHECK(r.max_absolute_error_small < 1e-9);
  }
}

TEST_CASE("softmax cross-entropy on uniform logits") {
  const Tensor z({2, 4});
  const std::vector<std::int32_t> y{1, 3};
  const auto r = softmax_cross_entropy(z, y);
  CHECK(r.loss == doctest::Approx(std::log(4.0)).epsilon(1e-6));
  // (softmax - onehot) / batch
  CHECK(r.dlogits[0] == doctest::Approx(0.125));
  CHECK(r.dlogits[1] == doctest::Approx(-0.375));
  CHECK(r.dlogits[7] == doctest::Approx(-0.375));
}

TEST_CASE("softmax cross-entropy is stable for large logits") {
  const Tensor z({1, 2}, {1000.0f, 0.0f});
  const std::vector<std::int32_t> y{1};
  const auto r = softmax_cross_entropy(z, y);
  CHECK(r.loss == doctest::Approx(1000.0));
  CHECK(r.dlogits.all_finite());
}

TEST_CASE("input validation names the failing layer") {
  Network net = make_mlp(4, {3}, 2);
  try {
    forward(net, Tensor({2, 5}));
    FAIL("expected a shape error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
  }
  Tensor bad({1, 4});
  bad[2] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS(forward(net, bad));
  const std::vector<std::int32_t> labels{7};
  CHECK_THROWS_AS(backward(net, Tensor({1, 4}), labels), std::out_of_range);
}

TEST_CASE("sgd step matches the momentum formula") {
  NetworkT<double> net{{2}, {LinearT<double>{TensorT<double>({2, 1}, {1.0, -2.0}), TensorT<double>({1}, {0.5})}}};
  GradientsT<double> g(1);
  g[0] = {TensorT<double>({2, 1}, {0.1, 0.2}), TensorT<double>({1}, {-0.3})};
  SgdT<double> opt(0.9, 0.01);
  opt.step(net, g, 0.1);
  opt.step(net, g, 0.1);
  // v1 = g + wd w0, w1 = w0 - lr v1; v2 = 0.9 v1 + g + wd w1, w2 = w1 - lr v2
  auto expect = [](double w0, double gr) {
    const double v1 = gr + 0.01 * w0, w1 = w0 - 0.1 * v1;
    const double v2 = 0.9 * v1 + gr + 0.01 * w1;
    return w1 - 0.1 * v2;
  };
  const auto& l = std::get<LinearT<double>>(net.layers[0]);
  CHECK(l.weights[0] == doctest::Approx(expect(1.0, 0.1)).epsilon(1e-14));
  CHECK(l.weights[1] == doctest::Approx(expect(-2.0, 0.2)).epsilon(1e-14));
  CHECK(l.bias[0] == doctest::Approx(expect(0.5, -0.3)).epsilon(1e-14));
}

TEST_CASE("adam step matches the bias-corrected update with decoupled decay") {
  NetworkT<double> net{{1}, {LinearT<double>{TensorT<double>({1, 1}, {0.7}), TensorT<double>({1}, {0.0})}}};
  GradientsT<double> g(1);
  g[0] = {TensorT<double>({1, 1}, {0.2}), TensorT<double>({1}, {0.0})};
  AdamT<double> opt({});
  double w = 0.7, m = 0, v = 0;
  for (int t = 1; t <= 3; ++t) {
    opt.step(net, g, 0.01);
    m = 0.9 * m + 0.1 * 0.2;
    v = 0.99 * v + 0.01 * 0.04;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.99, t));
    w = w * (1 - 0.01 * 0.01) - 0.01 * mh / (std::sqrt(vh) + 1e-5);
  }
  CHECK(std::get<LinearT<double>>(net.layers[0]).weights[0] == doctest::Approx(w).epsilon(1e-12));
}

TEST_CASE("one-cycle learning rate") {
  const LrSchedule s{1e-3, 0.25, 1000};
  CHECK(s.warmup_steps() == 250);
  CHECK(lr_at(s, 0) == doctest::Approx(1e-3 / 25));
  CHECK(lr_at(s, 250) == 1e-3);
  CHECK(lr_at(s, 1000) == doctest::Approx(1e-7));
  double prev = 0;
  for (std::int64_t t = 0; t <= 250; ++t) {
    CHECK(lr_at(s, t) >= prev);
    prev = lr_at(s, t);
  }
  for (std::int64_t t = 251; t <= 1000; ++t) {
    CHECK(lr_at(s, t) <= prev);
    prev = lr_at(s, t);
  }
  CHECK_THROWS_AS(lr_at(s, 1001), std::out_of_range);
  CHECK(LrSchedule{1e-3, 0.25, 1}.warmup_steps() == 1);
}

TEST_CASE("model builders") {
  const Network mlp = make_mlp(784, kMlpHidden, 10);
  CHECK(infer_shapes(mlp).back() == Shape{10});
  const Network vgg = make_small_vgg({3, 32, 32}, kSmallVggWidths, 10);
  CHECK(infer_shapes(vgg).back() == Shape{10});
  CHECK(num_classes(vgg) == 10);
  CHECK(parse_arch("smallvgg") == Arch::SmallVgg);
  CHECK_THROWS(parse_arch("resnet"));

  Network a = mlp, b = mlp;
  initialize(a, 42);
  initialize(b, 42);
  CHECK(std::get<Linear>(a.layers[0]).weights == std::get<Linear>(b.layers[0]).weights);
  const float bound = 1.0f / std::sqrt(784.0f);
  CHECK(std::get<Linear>(a.layers[0]).weights.vec().cwiseAbs().maxCoeff() <= bound);
}
