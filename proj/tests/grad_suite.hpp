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


#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "acton/autodiff.hpp"
#include "acton/tan.hpp"
#include "acton/train.hpp"

// Gradient checks over every autodiff op, the training losses and a tiny
// encoder. Shared by the unit tests and the acceptance runner.
namespace acton::testing {

struct GradResult {
  std::string name;
  double error = 0.0;
};

class GradSuite {
 public:
  explicit GradSuite(std::uint64_t seed, double eps = 1e-4) : rng_(seed), eps_(eps) {}

  const std::vector<GradResult>& results() const { return results_; }

  double worst() const {
    double w = 0.0;
    for (const auto& r : results_) w = std::max(w, r.error);
    return w;
  }

  void run_all() {
    ops();
    losses();
    model();
  }

  void ops() {
    using namespace ad;
    const Tensor a = rand({3, 4}), b = rand({3, 4});
    binary("add", a, b, [](const Tensor& x, const Tensor& y) { return add(x, y); });
    binary("sub", a, b, [](const Tensor& x, const Tensor& y) { return sub(x, y); });
    binary("mul", a, b, [](const Tensor& x, const Tensor& y) { return mul(x, y); });
    unary("scale", a, [](const Tensor& x) { return scale(x, -1.7); });
    unary("add_scalar", a, [](const Tensor& x) { return add_scalar(x, 0.3); });
    const std::vector<double> mask = rand({3, 4}).value();
    unary("add_const", a, [&](const Tensor& x) { return add_const(x, mask); });
    unary("exp", a, [](const Tensor& x) { return exp(x); });
    unary("log", positive({3, 4}), [](const Tensor& x) { return log(x); });
    unary("sqrt", positive({3, 4}), [](const Tensor& x) { return sqrt(x); });
    unary("relu", away_from_kinks({3, 4}), [](const Tensor& x) { return relu(x); });

    const Tensor m = rand({4, 5}), n = rand({5, 2}), p = rand({3, 5});
    binary("matmul", m, n, [](const Tensor& x, const Tensor& y) { return matmul(x, y); });
    binary("matmul_transposed", m, p, [](const Tensor& x, const Tensor& y) { return matmul_transposed(x, y); });
    unary("transpose", m, [](const Tensor& x) { return transpose(x); });
    unary("reshape", m, [](const Tensor& x) { return reshape(x, {2, 10}); });
    binary("add_row", m, rand({5}), [](const Tensor& x, const Tensor& y) { return add_row(x, y); });
    binary("add_col", m, rand({4, 1}), [](const Tensor& x, const Tensor& y) { return add_col(x, y); });
    binary("concat_rows", m, rand({2, 5}), [](const Tensor& x, const Tensor& y) {
      const Tensor parts[] = {x, y};
      return concat(parts, 0);
    });
    binary("concat_cols", m, rand({4, 3}), [](const Tensor& x, const Tensor& y) {
      const Tensor parts[] = {x, y};
      return concat(parts, 1);
    });
    unary("slice_rows", m, [](const Tensor& x) { return slice(x, 0, 1, 3); });
    unary("slice_cols", m, [](const Tensor& x) { return slice(x, 1, 2, 5); });
    unary("gather_rows", m, [](const Tensor& x) {
      const std::size_t rows[] = {3, 0, 3, 1};
      return gather_rows(x, rows);
    });
    unary("pick", m, [](const Tensor& x) {
      const std::pair<std::size_t, std::size_t> at[] = {{0, 1}, {3, 4}, {0, 1}};
      return pick(x, at);
    });

    unary("sum", m, [](const Tensor& x) { return sum(x); });
    unary("mean", m, [](const Tensor& x) { return mean(x); });
    unary("sum_axis0", m, [](const Tensor& x) { return sum(x, 0); });
    unary("sum_axis1", m, [](const Tensor& x) { return sum(x, 1); });
    unary("softmax_axis0", m, [](const Tensor& x) { return softmax(x, 0); });
    unary("softmax_axis1", m, [](const Tensor& x) { return softmax(x, 1); });
    unary("logsumexp_axis0", m, [](const Tensor& x) { return logsumexp(x, 0); });
    unary("logsumexp_axis1", m, [](const Tensor& x) { return logsumexp(x, 1); });
    const Tensor gamma = rand({5}), beta = rand({5});
    unary("layer_norm_x", m, [&](const Tensor& x) { return layer_norm(x, gamma, beta); });
    unary("layer_norm_gamma", gamma, [&](const Tensor& g) { return layer_norm(m, g, beta); });
    unary("layer_norm_beta", beta, [&](const Tensor& bb) { return layer_norm(m, gamma, bb); });
    unary("l2_normalize_rows", m, [](const Tensor& x) { return l2_normalize_rows(x); });
    unary("row_norm", m, [](const Tensor& x) { return row_norm(x); });
    binary("dot_similarity", m, p, [](const Tensor& x, const Tensor& y) { return dot_similarity(x, y); });
    binary("cosine_similarity", m, p, [](const Tensor& x, const Tensor& y) { return cosine_similarity(x, y); });
  }

  void losses() {
    using namespace ad;
    // Two clips of five frames per view, packed row-wise into one tensor:
    // rows [0, 10) are view A, rows [10, 20) view B.
    const std::size_t clips = 2, frames = 5, dim = 4;
    const std::vector<std::vector<augment::Correspondence>> corr = {
        {{0, 0}, {1, 2}, {2, 4}}, {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}}};
    auto nt_xent = [=](train::NegativeMode mode) {
      return [=](const Tensor& x) {
        const Tensor v = l2_normalize_rows(x);
        std::vector<Tensor> va, vb;
        for (std::size_t c = 0; c < clips; ++c) {
          va.push_back(slice(v, 0, c * frames, (c + 1) * frames));
          vb.push_back(slice(v, 0, (clips + c) * frames, (clips + c + 1) * frames));
        }
        return train::frame_nt_xent(va, vb, corr, mode, 0.5);
      };
    };
    const Tensor packed = rand({2 * clips * frames, dim});
    record("frame_nt_xent_exclude_same_clip", ad::grad_check(nt_xent(train::NegativeMode::kExcludeSameClip), packed, eps_));
    record("frame_nt_xent_all_frames", ad::grad_check(nt_xent(train::NegativeMode::kAllFrames), packed, eps_));

    const Tensor pair = rand({20, dim});
    const std::uint64_t tcn_seed = rng_.next();
    record("tcn_loss", ad::grad_check(
                           [=](const Tensor& x) {
                             Rng r(tcn_seed);
                             train::TcnOptions o;
                             o.anchors = 4;
                             o.pos_window = 1;
                             o.neg_multiplier = 2;
                             o.margin = 4.0;
                             return train::tcn_loss(slice(x, 0, 0, 10), slice(x, 0, 10, 20), 1.0, o, r);
                           },
                           pair, eps_));
    // Like the contrastive loss, TCC sees unit-norm projections in training.
    record("tcc_loss", ad::grad_check(
                           [](const Tensor& x) {
                             const Tensor v = l2_normalize_rows(x);
                             return train::tcc_loss(slice(v, 0, 0, 10), slice(v, 0, 10, 20), 0.5);
                           },
                           pair, eps_));
  }

  // encode then project at hidden 16, one layer, two heads, T = 6, J = 3.
  void model() {
    using namespace ad;
    tan::TanConfig cfg;
    cfg.input_dim = 9;
    cfg.hidden_dim = 16;
    cfg.encoder_layers = 1;
    cfg.attention_heads = 2;
    cfg.ffn_dim = 32;
    cfg.projection_dim = 8;
    cfg.sequence_length = 6;
    const tan::TanWeights base(cfg, rng_.next());
    const Tensor input = rand({6, 9});
    const Tensor weighting = rand({6, 8});
    auto probe = [weighting](const Tensor& v) { return sum(mul(mul(v, v), weighting)); };

    record("encode_project_input", ad::grad_check(
                                       [&](const Tensor& x) {
                                         const Tensor items[] = {x};
                                         return probe(tan::project(tan::encode(items, base)[0], base));
                                       },
                                       input, eps_));
    for (std::size_t i = 0; i < base.params().size(); ++i) {
      const auto& [name, value] = base.params()[i];
      record("encode_project_" + name, ad::grad_check(
                                            [&, i](const Tensor& x) {
                                              tan::TanWeights w = base.clone();
                                              w.params()[i].second = x;
                                              const Tensor items[] = {Tensor::from(input.shape(), input.value())};
                                              return probe(tan::project(tan::encode(items, w)[0], w));
                                            },
                                            value, eps_));
    }
  }

 private:
  ad::Tensor rand(ad::Shape shape) {
    ad::Tensor t = ad::Tensor::zeros(std::move(shape));
    for (double& v : t.mutable_value()) v = rng_.normal();
    return t;
  }
  ad::Tensor positive(ad::Shape shape) {
    ad::Tensor t = rand(std::move(shape));
    for (double& v : t.mutable_value()) v = 0.5 + std::abs(v);
    return t;
  }
  ad::Tensor away_from_kinks(ad::Shape shape) {
    ad::Tensor t = rand(std::move(shape));
    for (double& v : t.mutable_value())
      while (std::abs(v) < 1e-3) v = rng_.normal();
    return t;
  }
  // A random fixed weighting turns any tensor output into a scalar whose
  // gradient touches every output element differently.
  ad::Tensor weigh(const ad::Tensor& y, std::uint64_t seed) const {
    Rng r(seed);
    std::vector<double> w(y.size());
    for (double& v : w) v = r.normal();
    return ad::sum(ad::mul(y, ad::Tensor::from(y.shape(), std::move(w))));
  }
  void unary(const std::string& name, const ad::Tensor& x, const std::function<ad::Tensor(const ad::Tensor&)>& op) {
    const std::uint64_t s = rng_.next();
    record(name, ad::grad_check([&](const ad::Tensor& t) { return weigh(op(t), s); }, x, eps_));
  }
  void binary(const std::string& name, const ad::Tensor& a, const ad::Tensor& b,
              const std::function<ad::Tensor(const ad::Tensor&, const ad::Tensor&)>& op) {
    const std::uint64_t s = rng_.next();
    record(name + "[a]", ad::grad_check([&](const ad::Tensor& t) { return weigh(op(t, b), s); }, a, eps_));
    record(name + "[b]", ad::grad_check([&](const ad::Tensor& t) { return weigh(op(a, t), s); }, b, eps_));
  }
  void record(std::string name, double error) { results_.push_back({std::move(name), error}); }

  Rng rng_;
  double eps_;
  std::vector<GradResult> results_;
};

}  // namespace acton::testing
