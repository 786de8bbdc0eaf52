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

#include "acton/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace acton::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

std::size_t product(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

[[noreturn]] void shape_fail(const std::string& op, const Tensor& a) {
  throw ShapeError(op + ": unsupported shape " + shape_str(a.shape()));
}

[[noreturn]] void shape_fail(const std::string& op, const Tensor& a, const Tensor& b) {
  throw ShapeError(op + ": incompatible shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
}

void require_rank2(const std::string& op, const Tensor& a) {
  if (a.rank() != 2) shape_fail(op, a);
}

void require_same(const std::string& op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_fail(op, a, b);
}

ConstMapMat view(const std::vector<double>& v, std::size_t r, std::size_t c) {
  return ConstMapMat(v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

MapMat view(std::vector<double>& v, std::size_t r, std::size_t c) {
  return MapMat(v.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

Node& in(Node& n, std::size_t i) { return *n.inputs[i].node(); }

// Axis helper for rank-2 softmax-like ops: groups independent vectors of
// length entries spaced stride apart, group g starting at offset(g).
struct AxisWalk {
  std::size_t groups, length, stride, group_step;
  std::size_t offset(std::size_t g) const { return g * group_step; }
};

AxisWalk walk(const std::string& op, const Tensor& a, int axis) {
  require_rank2(op, a);
  const std::size_t r = a.rows(), c = a.cols();
  if (axis == 1) return {r, c, 1, c};
  if (axis == 0) return {c, r, c, 1};
  throw ShapeError(op + ": axis must be 0 or 1");
}

thread_local bool g_grad_enabled = true;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

Tensor make_result(std::string op, Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->op = std::move(op);
  n->shape = std::move(shape);
  n->value = std::move(value);
  if (g_grad_enabled)
    for (const Tensor& t : inputs) n->requires_grad = n->requires_grad || t.requires_grad();
  if (n->requires_grad) {
    n->inputs = std::move(inputs);
    n->backward = std::move(backward);
  }
  return Tensor(std::move(n));
}

std::vector<double>& Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

// ---------------------------------------------------------------- Tensor

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = product(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (product(shape) != values.size())
    throw ShapeError("Tensor::from: " + std::to_string(values.size()) + " values for shape " + shape_str(shape));
  auto n = std::make_shared<Node>();
  n->op = "leaf";
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::from(const Matrix& m, bool requires_grad) {
  return from({m.rows(), m.cols()}, m.values(), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from({}, {v}, requires_grad); }

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->value.size(); }
std::size_t Tensor::rows() const {
  if (rank() != 2) shape_fail("rows", *this);
  return node_->shape[0];
}
std::size_t Tensor::cols() const {
  if (rank() != 2) shape_fail("cols", *this);
  return node_->shape[1];
}
const std::vector<double>& Tensor::value() const { return node_->value; }
std::vector<double>& Tensor::mutable_value() { return node_->value; }
const std::vector<double>& Tensor::grad() const { return node_->grad; }
std::vector<double>& Tensor::mutable_grad() { return node_->grad; }
bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
void Tensor::set_requires_grad(bool on) { node_->requires_grad = on; }
void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}
double Tensor::item() const {
  if (size() != 1) throw ShapeError("item: tensor has " + std::to_string(size()) + " elements");
  return node_->value[0];
}
const std::string& Tensor::op() const { return node_->op; }

Matrix Tensor::to_matrix() const {
  if (rank() == 2) return Matrix(rows(), cols(), value());
  return Matrix(1, size(), value());
}

void Tensor::backward() const {
  if (size() != 1)
    throw ShapeError("backward: loss must be a scalar, got shape " + shape_str(shape()));
  if (!requires_grad()) return;

  // Iterative post-order DFS yields a topological order (inputs first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      Node* child = n->inputs[next++].node();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  node_->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
  // Interior gradients are not needed once propagated.
  for (Node* n : order)
    if (n->backward) std::vector<double>().swap(n->grad);
}

// ---------------------------------------------------------------- element-wise

Tensor add(const Tensor& a, const Tensor& b) {
  require_same("add", a, b);
  std::vector<double> v(a.value());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += b.value()[i];
  return make_result("add", a.shape(), std::move(v), {a, b}, [](Node& n) {
    for (int k = 0; k < 2; ++k) {
      Node& x = in(n, k);
      if (!x.requires_grad) continue;
      auto& g = x.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same("sub", a, b);
  std::vector<double> v(a.value());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b.value()[i];
  return make_result("sub", a.shape(), std::move(v), {a, b}, [](Node& n) {
    for (int k = 0; k < 2; ++k) {
      Node& x = in(n, k);
      if (!x.requires_grad) continue;
      const double sign = k == 0 ? 1.0 : -1.0;
      auto& g = x.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * n.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same("mul", a, b);
  std::vector<double> v(a.value());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= b.value()[i];
  return make_result("mul", a.shape(), std::move(v), {a, b}, [](Node& n) {
    Node& x = in(n, 0);
    Node& y = in(n, 1);
    if (x.requires_grad) {
      auto& g = x.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * y.value[i];
    }
    if (y.requires_grad) {
      auto& g = y.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * x.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> v(a.value());
  for (double& x : v) x *= s;
  return make_result("scale", a.shape(), std::move(v), {a}, [s](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * n.grad[i];
  });
}

Tensor add_scalar(const Tensor& a, double s) {
  std::vector<double> v(a.value());
  for (double& x : v) x += s;
  return make_result("add_scalar", a.shape(), std::move(v), {a}, [](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

Tensor add_const(const Tensor& a, std::span<const double> constant) {
  if (constant.size() != a.size())
    throw ShapeError("add_const: constant has " + std::to_string(constant.size()) + " elements for shape " +
                     shape_str(a.shape()));
  std::vector<double> v(a.value());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += constant[i];
  return make_result("add_const", a.shape(), std::move(v), {a}, [](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

Tensor exp(const Tensor& a) {
  std::vector<double> v(a.value());
  for (double& x : v) x = std::exp(x);
  return make_result("exp", a.shape(), std::move(v), {a}, [](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * n.value[i];
  });
}

Tensor log(const Tensor& a) {
  std::vector<double> v(a.value());
  for (double& x : v) x = std::log(x);
  return make_result("log", a.shape(), std::move(v), {a}, [](Node& n) {
    Node& x = in(n, 0);
    auto& g = x.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] / x.value[i];
  });
}

Tensor sqrt(const Tensor& a) {
  std::vector<double> v(a.value());
  for (double& x : v) x = std::sqrt(x);
  return make_result("sqrt", a.shape(), std::move(v), {a}, [](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (n.value[i] > 0.0) g[i] += 0.5 * n.grad[i] / n.value[i];
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> v(a.value());
  for (double& x : v) x = x > 0.0 ? x : 0.0;
  return make_result("relu", a.shape(), std::move(v), {a}, [](Node& n) {
    Node& x = in(n, 0);
    auto& g = x.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x.value[i] > 0.0) g[i] += n.grad[i];
  });
}

// ---------------------------------------------------------------- rank-2

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2("matmul", a);
  require_rank2("matmul", b);
  if (a.cols() != b.rows()) shape_fail("matmul", a, b);
  const std::size_t m = a.rows(), k = a.cols(), p = b.cols();
  std::vector<double> v(m * p);
  view(v, m, p).noalias() = view(a.value(), m, k) * view(b.value(), k, p);
  return make_result("matmul", {m, p}, std::move(v), {a, b}, [m, k, p](Node& n) {
    Node& x = in(n, 0);
    Node& y = in(n, 1);
    const auto g = view(n.grad, m, p);
    if (x.requires_grad) view(x.grad_buffer(), m, k).noalias() += g * view(y.value, k, p).transpose();
    if (y.requires_grad) view(y.grad_buffer(), k, p).noalias() += view(x.value, m, k).transpose() * g;
  });
}

Tensor matmul_transposed(const Tensor& a, const Tensor& b) {
  require_rank2("matmul_transposed", a);
  require_rank2("matmul_transposed", b);
  if (a.cols() != b.cols()) shape_fail("matmul_transposed", a, b);
  const std::size_t m = a.rows(), k = a.cols(), p = b.rows();
  std::vector<double> v(m * p);
  view(v, m, p).noalias() = view(a.value(), m, k) * view(b.value(), p, k).transpose();
  return make_result("matmul_transposed", {m, p}, std::move(v), {a, b}, [m, k, p](Node& n) {
    Node& x = in(n, 0);
    Node& y = in(n, 1);
    const auto g = view(n.grad, m, p);
    if (x.requires_grad) view(x.grad_buffer(), m, k).noalias() += g * view(y.value, p, k);
    if (y.requires_grad) view(y.grad_buffer(), p, k).noalias() += g.transpose() * view(x.value, m, k);
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2("transpose", a);
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> v(r * c);
  view(v, c, r) = view(a.value(), r, c).transpose();
  return make_result("transpose", {c, r}, std::move(v), {a}, [r, c](Node& n) {
    view(in(n, 0).grad_buffer(), r, c) += view(n.grad, c, r).transpose();
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (product(shape) != a.size()) throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  return make_result("reshape", std::move(shape), a.value(), {a}, [](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
  });
}

Tensor add_row(const Tensor& x, const Tensor& b) {
  require_rank2("add_row", x);
  const std::size_t r = x.rows(), c = x.cols();
  if (b.size() != c || b.rank() > 2 || (b.rank() == 2 && b.shape()[0] != 1)) shape_fail("add_row", x, b);
  std::vector<double> v(x.value());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[i * c + j] += b.value()[j];
  return make_result("add_row", x.shape(), std::move(v), {x, b}, [r, c](Node& n) {
    Node& xn = in(n, 0);
    Node& bn = in(n, 1);
    if (xn.requires_grad) {
      auto& g = xn.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (bn.requires_grad) {
      auto& g = bn.grad_buffer();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[j] += n.grad[i * c + j];
    }
  });
}

Tensor add_col(const Tensor& x, const Tensor& cv) {
  require_rank2("add_col", x);
  const std::size_t r = x.rows(), c = x.cols();
  if (cv.size() != r || cv.rank() > 2 || (cv.rank() == 2 && cv.shape()[1] != 1)) shape_fail("add_col", x, cv);
  std::vector<double> v(x.value());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) v[i * c + j] += cv.value()[i];
  return make_result("add_col", x.shape(), std::move(v), {x, cv}, [r, c](Node& n) {
    Node& xn = in(n, 0);
    Node& cn = in(n, 1);
    if (xn.requires_grad) {
      auto& g = xn.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (cn.requires_grad) {
      auto& g = cn.grad_buffer();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i] += n.grad[i * c + j];
    }
  });
}

Tensor concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  for (const Tensor& p : parts) require_rank2("concat", p);
  const std::size_t fixed = axis == 0 ? parts[0].cols() : parts[0].rows();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if ((axis == 0 ? p.cols() : p.rows()) != fixed) shape_fail("concat", parts[0], p);
    total += axis == 0 ? p.rows() : p.cols();
  }
  const Shape shape = axis == 0 ? Shape{total, fixed} : Shape{fixed, total};
  std::vector<double> v;
  v.reserve(total * fixed);
  if (axis == 0) {
    for (const Tensor& p : parts) v.insert(v.end(), p.value().begin(), p.value().end());
  } else {
    v.resize(total * fixed);
    std::size_t off = 0;
    for (const Tensor& p : parts) {
      const std::size_t pc = p.cols();
      for (std::size_t i = 0; i < fixed; ++i)
        std::copy_n(p.value().data() + i * pc, pc, v.data() + i * total + off);
      off += pc;
    }
  }
  return make_result("concat", shape, std::move(v), {parts.begin(), parts.end()}, [axis, total](Node& n) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      Node& p = in(n, k);
      const std::size_t pr = p.shape[0], pc = p.shape[1];
      if (p.requires_grad) {
        auto& g = p.grad_buffer();
        if (axis == 0) {
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[off * pc + i];
        } else {
          for (std::size_t i = 0; i < pr; ++i)
            for (std::size_t j = 0; j < pc; ++j) g[i * pc + j] += n.grad[i * total + off + j];
        }
      }
      off += axis == 0 ? pr : pc;
    }
  });
}

Tensor slice(const Tensor& a, int axis, std::size_t begin, std::size_t end) {
  require_rank2("slice", a);
  if (axis != 0 && axis != 1) throw ShapeError("slice: axis must be 0 or 1");
  const std::size_t r = a.rows(), c = a.cols();
  const std::size_t extent = axis == 0 ? r : c;
  if (begin >= end || end > extent)
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) + ") invalid for shape " +
                     shape_str(a.shape()));
  const std::size_t len = end - begin;
  Shape shape = axis == 0 ? Shape{len, c} : Shape{r, len};
  std::vector<double> v(len * (axis == 0 ? c : r));
  if (axis == 0) {
    std::copy_n(a.value().data() + begin * c, len * c, v.data());
  } else {
    for (std::size_t i = 0; i < r; ++i) std::copy_n(a.value().data() + i * c + begin, len, v.data() + i * len);
  }
  return make_result("slice", shape, std::move(v), {a}, [axis, begin, len, c, r](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    if (axis == 0) {
      for (std::size_t i = 0; i < len * c; ++i) g[begin * c + i] += n.grad[i];
    } else {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < len; ++j) g[i * c + begin + j] += n.grad[i * len + j];
    }
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  require_rank2("gather_rows", a);
  const std::size_t c = a.cols();
  std::vector<double> v(rows.size() * c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= a.rows()) throw ShapeError("gather_rows: row index out of range for " + shape_str(a.shape()));
    std::copy_n(a.value().data() + rows[i] * c, c, v.data() + i * c);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return make_result("gather_rows", {idx.size(), c}, std::move(v), {a}, [idx, c](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < c; ++j) g[idx[i] * c + j] += n.grad[i * c + j];
  });
}

Tensor pick(const Tensor& a, std::span<const std::pair<std::size_t, std::size_t>> at) {
  require_rank2("pick", a);
  const std::size_t c = a.cols();
  std::vector<std::size_t> flat(at.size());
  std::vector<double> v(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    if (at[i].first >= a.rows() || at[i].second >= c) throw ShapeError("pick: index out of range for " + shape_str(a.shape()));
    flat[i] = at[i].first * c + at[i].second;
    v[i] = a.value()[flat[i]];
  }
  return make_result("pick", {flat.size()}, std::move(v), {a}, [flat](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t i = 0; i < flat.size(); ++i) g[flat[i]] += n.grad[i];
  });
}

// ---------------------------------------------------------------- reductions

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.value()) s += x;
  return make_result("sum", {}, {s}, {a}, [](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (double& x : g) x += n.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean: empty tensor");
  const double inv = 1.0 / static_cast<double>(a.size());
  double s = 0.0;
  for (double x : a.value()) s += x;
  return make_result("mean", {}, {s * inv}, {a}, [inv](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (double& x : g) x += n.grad[0] * inv;
  });
}

Tensor sum(const Tensor& a, int axis) {
  const AxisWalk w = walk("sum", a, axis);
  std::vector<double> v(w.groups, 0.0);
  for (std::size_t gi = 0; gi < w.groups; ++gi)
    for (std::size_t k = 0; k < w.length; ++k) v[gi] += a.value()[w.offset(gi) + k * w.stride];
  Shape shape = axis == 1 ? Shape{a.rows(), 1} : Shape{1, a.cols()};
  return make_result("sum_axis", shape, std::move(v), {a}, [w](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t gi = 0; gi < w.groups; ++gi)
      for (std::size_t k = 0; k < w.length; ++k) g[w.offset(gi) + k * w.stride] += n.grad[gi];
  });
}

Tensor softmax(const Tensor& a, int axis) {
  const AxisWalk w = walk("softmax", a, axis);
  std::vector<double> v(a.size());
  const auto& x = a.value();
  for (std::size_t gi = 0; gi < w.groups; ++gi) {
    const std::size_t o = w.offset(gi);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w.length; ++k) m = std::max(m, x[o + k * w.stride]);
    double s = 0.0;
    for (std::size_t k = 0; k < w.length; ++k) s += (v[o + k * w.stride] = std::exp(x[o + k * w.stride] - m));
    for (std::size_t k = 0; k < w.length; ++k) v[o + k * w.stride] /= s;
  }
  return make_result("softmax", a.shape(), std::move(v), {a}, [w](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t gi = 0; gi < w.groups; ++gi) {
      const std::size_t o = w.offset(gi);
      double dot = 0.0;
      for (std::size_t k = 0; k < w.length; ++k) dot += n.grad[o + k * w.stride] * n.value[o + k * w.stride];
      for (std::size_t k = 0; k < w.length; ++k) {
        const std::size_t i = o + k * w.stride;
        g[i] += n.value[i] * (n.grad[i] - dot);
      }
    }
  });
}

Tensor logsumexp(const Tensor& a, int axis) {
  const AxisWalk w = walk("logsumexp", a, axis);
  const auto& x = a.value();
  std::vector<double> v(w.groups);
  for (std::size_t gi = 0; gi < w.groups; ++gi) {
    const std::size_t o = w.offset(gi);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w.length; ++k) m = std::max(m, x[o + k * w.stride]);
    if (!std::isfinite(m)) throw std::domain_error("logsumexp: group without finite entries");
    double s = 0.0;
    for (std::size_t k = 0; k < w.length; ++k) s += std::exp(x[o + k * w.stride] - m);
    v[gi] = m + std::log(s);
  }
  Shape shape = axis == 1 ? Shape{a.rows(), 1} : Shape{1, a.cols()};
  return make_result("logsumexp", shape, std::move(v), {a}, [w](Node& n) {
    Node& xn = in(n, 0);
    auto& g = xn.grad_buffer();
    for (std::size_t gi = 0; gi < w.groups; ++gi) {
      const std::size_t o = w.offset(gi);
      for (std::size_t k = 0; k < w.length; ++k) {
        const std::size_t i = o + k * w.stride;
        g[i] += n.grad[gi] * std::exp(xn.value[i] - n.value[gi]);
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_rank2("layer_norm", x);
  const std::size_t r = x.rows(), c = x.cols();
  if (gamma.size() != c) shape_fail("layer_norm", x, gamma);
  if (beta.size() != c) shape_fail("layer_norm", x, beta);
  std::vector<double> xhat(r * c), inv_std(r), v(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = x.value().data() + i * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += row[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (row[j] - mu) * inv_std[i];
      v[i * c + j] = gamma.value()[j] * xhat[i * c + j] + beta.value()[j];
    }
  }
  return make_result("layer_norm", x.shape(), std::move(v), {x, gamma, beta},
                     [r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
                       Node& xn = in(n, 0);
                       Node& gn = in(n, 1);
                       Node& bn = in(n, 2);
                       if (gn.requires_grad) {
                         auto& g = gn.grad_buffer();
                         for (std::size_t i = 0; i < r * c; ++i) g[i % c] += n.grad[i] * xhat[i];
                       }
                       if (bn.requires_grad) {
                         auto& g = bn.grad_buffer();
                         for (std::size_t i = 0; i < r * c; ++i) g[i % c] += n.grad[i];
                       }
                       if (!xn.requires_grad) return;
                       auto& g = xn.grad_buffer();
                       std::vector<double> dxhat(c);
                       for (std::size_t i = 0; i < r; ++i) {
                         double m1 = 0.0, m2 = 0.0;
                         for (std::size_t j = 0; j < c; ++j) {
                           dxhat[j] = n.grad[i * c + j] * gn.value[j];
                           m1 += dxhat[j];
                           m2 += dxhat[j] * xhat[i * c + j];
                         }
                         m1 /= static_cast<double>(c);
                         m2 /= static_cast<double>(c);
                         for (std::size_t j = 0; j < c; ++j)
                           g[i * c + j] += inv_std[i] * (dxhat[j] - m1 - xhat[i * c + j] * m2);
                       }
                     });
}

Tensor l2_normalize_rows(const Tensor& x, double min_norm) {
  require_rank2("l2_normalize_rows", x);
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> norms(r), v(x.value());
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += v[i * c + j] * v[i * c + j];
    norms[i] = std::sqrt(s);
    if (norms[i] < min_norm)
      throw std::domain_error("l2_normalize_rows: row " + std::to_string(i) + " has degenerate norm " +
                              std::to_string(norms[i]));
    for (std::size_t j = 0; j < c; ++j) v[i * c + j] /= norms[i];
  }
  return make_result("l2_normalize_rows", x.shape(), std::move(v), {x}, [r, c, norms = std::move(norms)](Node& n) {
    auto& g = in(n, 0).grad_buffer();
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += n.grad[i * c + j] * n.value[i * c + j];
      for (std::size_t j = 0; j < c; ++j)
        g[i * c + j] += (n.grad[i * c + j] - n.value[i * c + j] * dot) / norms[i];
    }
  });
}

Tensor row_norm(const Tensor& x) {
  require_rank2("row_norm", x);
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> v(r);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += x.value()[i * c + j] * x.value()[i * c + j];
    v[i] = std::sqrt(s);
  }
  return make_result("row_norm", {r, 1}, std::move(v), {x}, [r, c](Node& n) {
    Node& xn = in(n, 0);
    auto& g = xn.grad_buffer();
    for (std::size_t i = 0; i < r; ++i) {
      if (n.value[i] == 0.0) continue;  // subgradient 0 at the origin
      const double k = n.grad[i] / n.value[i];
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += k * xn.value[i * c + j];
    }
  });
}

Tensor dot_similarity(const Tensor& a, const Tensor& b) { return matmul_transposed(a, b); }

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
  return matmul_transposed(l2_normalize_rows(a), l2_normalize_rows(b));
}

// ---------------------------------------------------------------- checking

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
  Tensor probe = Tensor::from(x.shape(), x.value(), true);
  f(probe).backward();
  std::vector<double> analytic = probe.grad();
  if (analytic.empty()) analytic.assign(probe.size(), 0.0);

  std::vector<double> point = x.value();
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + eps;
    const double up = f(Tensor::from(x.shape(), point)).item();
    point[i] = saved - eps;
    const double down = f(Tensor::from(x.shape(), point)).item();
    point[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace acton::ad
