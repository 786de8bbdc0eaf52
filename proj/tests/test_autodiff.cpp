// Copyright 2026 The Acton Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <numeric>

#include "acton/autodiff.hpp"
#include "doctest.h"
#include "grad_suite.hpp"

using namespace acton;
using namespace acton::ad;

TEST_CASE("derivative of x*x at 3 is 6") {
  Tensor x = Tensor::scalar(3.0, true);
  mul(x, x).backward();
  CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("softmax of a constant row is uniform") {
  const Tensor s = softmax(Tensor::from({1, 4}, {2, 2, 2, 2}), 1);
  for (double v : s.value()) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("softmax rows sum to one even for large logits") {
  const Tensor s = softmax(Tensor::from({2, 3}, {1000, 1001, 999, -5, 0, 5}), 1);
  for (std::size_t r = 0; r < 2; ++r) {
    const double total = s.value()[r * 3] + s.value()[r * 3 + 1] + s.value()[r * 3 + 2];
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("layer norm output has zero mean and unit variance before the affine") {
  Rng rng(4);
  Tensor x = Tensor::zeros({3, 6});
  for (double& v : x.mutable_value()) v = 5.0 * rng.normal() + 2.0;
  const Tensor y = layer_norm(x, Tensor::from({6}, std::vector<double>(6, 1.0)), Tensor::zeros({6}));
  for (std::size_t r = 0; r < 3; ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 0; c < 6; ++c) mean += y.value()[r * 6 + c] / 6.0;
    for (std::size_t c = 0; c < 6; ++c) var += std::pow(y.value()[r * 6 + c] - mean, 2) / 6.0;
    CHECK(std::abs(mean) < 1e-9);
    // The 1e-5 epsilon inside the root shifts the variance slightly below 1.
    CHECK(std::abs(var - 1.0) < 1e-5);
  }
}

TEST_CASE("sum of a matrix product: hand-computed gradients") {
  Tensor A = Tensor::from({2, 2}, {1, 2, 3, 4}, true);
  Tensor B = Tensor::from({2, 2}, {5, 6, 7, 8}, true);
  sum(matmul(A, B)).backward();
  // d/dA_ik sum_ij (AB)_ij = sum_j B_kj; d/dB_kj = sum_i A_ik.
  CHECK(A.grad() == std::vector<double>{11, 15, 11, 15});
  CHECK(B.grad() == std::vector<double>{4, 4, 6, 6});
}

TEST_CASE("disconnected parameter keeps a zero gradient") {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  Tensor unused = Tensor::from({2}, {3, 4}, true);
  sum(mul(x, x)).backward();
  const auto& g = unused.grad();
  CHECK(std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("two paths to one parameter add their gradients") {
  Tensor x = Tensor::scalar(2.0, true);
  add(scale(x, 3.0), mul(x, x)).backward();
  CHECK(x.grad()[0] == doctest::Approx(3.0 + 4.0));
}

TEST_CASE("backward requires a scalar") {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  CHECK_THROWS(mul(x, x).backward());
}

TEST_CASE("shape errors name the op") {
  const Tensor a = Tensor::zeros({2, 3}), b = Tensor::zeros({3, 2});
  try {
    add(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("add") != std::string::npos);
  }
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
}

TEST_CASE("gradient of the norm of a normalized vector is zero") {
  const Tensor x = Tensor::from({1, 3}, {0.3, -1.2, 2.0});
  Tensor probe = Tensor::from(x.shape(), x.value(), true);
  const Tensor y = l2_normalize_rows(probe);
  sum(mul(y, y)).backward();
  for (double g : probe.grad()) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("no graph is recorded under NoGradGuard") {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  NoGradGuard guard;
  const Tensor y = mul(x, x);
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("backward is deterministic") {
  Rng rng(8);
  Tensor x = Tensor::zeros({3, 3}, true);
  for (double& v : x.mutable_value()) v = rng.normal();
  auto run = [&] {
    x.zero_grad();
    sum(softmax(matmul(x, transpose(x)), 1) * x).backward();
    return x.grad();
  };
  CHECK(run() == run());
}

TEST_CASE("grad_check on quadratic, perceptron and constant") {
  Rng rng(12);
  Tensor x = Tensor::zeros({5});
  for (double& v : x.mutable_value()) v = rng.normal();
  CHECK(grad_check([](const Tensor& t) { return sum(mul(t, t)); }, x) < 1e-6);
  CHECK(grad_check([](const Tensor& t) { return scale(sum(t), 0.0); }, x) < 1e-4);

  Tensor W1 = Tensor::zeros({4, 5}), W2 = Tensor::zeros({1, 4});
  for (double& v : W1.mutable_value()) v = rng.normal();
  for (double& v : W2.mutable_value()) v = rng.normal();
  const Tensor in = reshape(x, {5, 1});
  // Stay away from the kink: the check below would be meaningless otherwise.
  const Tensor pre = matmul(W1, in);
  for (double v : pre.value()) REQUIRE(std::abs(v) > 1e-3);
  auto mlp = [&](const Tensor& w1) { return sum(matmul(W2, relu(matmul(w1, in)))); };
  CHECK(grad_check(mlp, W1) < 1e-4);
}

TEST_CASE("every op, loss and the tiny model pass the gradient check") {
  acton::testing::GradSuite suite(2024);
  suite.run_all();
  for (const auto& r : suite.results()) {
    INFO(r.name);
    CHECK(r.error < 1e-4);
  }
}
