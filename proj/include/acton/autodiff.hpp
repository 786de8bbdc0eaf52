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

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "acton/common.hpp"

// Reverse-mode automatic differentiation over dense float64 tensors.
//
// Every op returns a new Tensor whose node remembers its inputs and a
// backward closure, but only when at least one input requires a gradient;
// inference therefore builds no graph. Broadcasting exists only where an op
// says so (add_row, add_col); everything else demands identical shapes.
namespace acton::ad {

using Shape = std::vector<std::size_t>;

// While alive, ops on this thread record no graph (inference mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};
bool grad_enabled();

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Node;

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor from(const Matrix& m, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  // Rank-2 accessors; throw for other ranks.
  std::size_t rows() const;
  std::size_t cols() const;

  const std::vector<double>& value() const;
  std::vector<double>& mutable_value();
  // Empty until a backward pass reaches this tensor.
  const std::vector<double>& grad() const;
  std::vector<double>& mutable_grad();
  bool requires_grad() const;
  void set_requires_grad(bool on);
  void zero_grad();
  double item() const;
  const std::string& op() const;

  Matrix to_matrix() const;

  // Accumulates d(this)/d(leaf) into every reachable leaf with requires_grad.
  // this must hold exactly one element.
  void backward() const;

  Node* node() const { return node_.get(); }

 private:
  friend Tensor make_result(std::string op, Shape shape, std::vector<double> value,
                            std::vector<Tensor> inputs, std::function<void(Node&)> backward);
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  std::shared_ptr<Node> node_;
};

struct Node {
  std::string op;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<Tensor> inputs;
  std::function<void(Node&)> backward;

  // Zero-initialised gradient buffer of this node.
  std::vector<double>& grad_buffer();
};

// ---- element-wise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
// Adds a constant (non-differentiable) tensor of the same shape; used for masks.
Tensor add_const(const Tensor& a, std::span<const double> constant);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor relu(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

// ---- rank-2 structure ----
Tensor matmul(const Tensor& a, const Tensor& b);
// a * b^T without materialising the transpose.
Tensor matmul_transposed(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);
// X (R x C) + b (C or 1 x C), broadcast over rows.
Tensor add_row(const Tensor& x, const Tensor& b);
// X (R x C) + c (R or R x 1), broadcast over columns.
Tensor add_col(const Tensor& x, const Tensor& c);
Tensor concat(std::span<const Tensor> parts, int axis);
Tensor slice(const Tensor& a, int axis, std::size_t begin, std::size_t end);
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);
// Elements at (row, col) pairs as a rank-1 tensor.
Tensor pick(const Tensor& a, std::span<const std::pair<std::size_t, std::size_t>> at);

// ---- reductions and normalisations ----
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Keeps the reduced axis with extent 1.
Tensor sum(const Tensor& a, int axis);
Tensor softmax(const Tensor& a, int axis);
Tensor logsumexp(const Tensor& a, int axis);
// Normalises every row to zero mean / unit variance, then applies gamma, beta (length C).
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);
// Rows divided by their L2 norm; throws if a norm falls below min_norm.
Tensor l2_normalize_rows(const Tensor& x, double min_norm = 1e-12);
// Per-row L2 norm as R x 1.
Tensor row_norm(const Tensor& x);
Tensor dot_similarity(const Tensor& a, const Tensor& b);
Tensor cosine_similarity(const Tensor& a, const Tensor& b);

// Max over coordinates of |analytic - numeric| / max(1e-8, |analytic| + |numeric|),
// numeric by central differences with step eps.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps = 1e-4);

}  // namespace acton::ad
