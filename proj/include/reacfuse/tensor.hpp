#ifndef REACFUSE_TENSOR_HPP
#define REACFUSE_TENSOR_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <unordered_set>
#include <vector>

#include "reacfuse/errors.hpp"
#include "reacfuse/rng.hpp"

namespace reacfuse::core {

using Index = std::int64_t;

template <typename S>
using EMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One node of the backward graph. Children hold shared_ptrs to parents, so a
// whole graph is released when the loss handle goes out of scope; parameter
// nodes survive because the model owns them.
template <typename S>
struct TensorNode {
  Index rows = 0, cols = 0;
  std::vector<S> values;
  std::vector<S> grad;  // allocated lazily (eagerly for parameters)
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  Index numel() const { return rows * cols; }
  void ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), S(0));
  }
};

template <typename S>
class Tensor {
public:
  Tensor() = default;

  static Tensor zeros(Index r, Index c) {
    return make(r, c, std::vector<S>(static_cast<std::size_t>(r * c), S(0)), false);
  }
  static Tensor full(Index r, Index c, S value) {
    return make(r, c, std::vector<S>(static_cast<std::size_t>(r * c), value), false);
  }
  static Tensor from(Index r, Index c, std::vector<S> values) {
    check_size(r, c, values.size());
    return make(r, c, std::move(values), false);
  }
  static Tensor scalar(S value) { return from(1, 1, {value}); }

  // trainable parameter: grads allocated up front so "unreachable" parameters
  // report zeros rather than nothing
  static Tensor param(Index r, Index c, std::vector<S> values) {
    check_size(r, c, values.size());
    Tensor t = make(r, c, std::move(values), true);
    t.node_->ensure_grad();
    return t;
  }
  static Tensor param_zeros(Index r, Index c) {
    return param(r, c, std::vector<S>(static_cast<std::size_t>(r * c), S(0)));
  }
  static Tensor param_randn(Index r, Index c, S stddev, Rng& rng) {
    std::vector<S> v(static_cast<std::size_t>(r * c));
    for (auto& x : v) x = static_cast<S>(rng.normal()) * stddev;
    return param(r, c, std::move(v));
  }

  bool defined() const { return node_ != nullptr; }
  Index rows() const { return node_->rows; }
  Index cols() const { return node_->cols; }
  Index numel() const { return node_->numel(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::vector<S>& values() { return node_->values; }
  const std::vector<S>& values() const { return node_->values; }
  std::vector<S>& grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  const std::vector<S>& grad_view() const { return node_->grad; }

  S item() const {
    if (numel() != 1) throw ShapeError("NotScalar", "item() on non-scalar tensor");
    return node_->values[0];
  }
  S at(Index i, Index j) const { return node_->values[static_cast<std::size_t>(i * cols() + j)]; }

  std::shared_ptr<TensorNode<S>>& node() { return node_; }
  const std::shared_ptr<TensorNode<S>>& node() const { return node_; }

  Eigen::Map<EMat<S>> mat() {
    return {node_->values.data(), node_->rows, node_->cols};
  }
  Eigen::Map<const EMat<S>> mat() const {
    return {node_->values.data(), node_->rows, node_->cols};
  }
  Eigen::Map<EMat<S>> gmat() {
    node_->ensure_grad();
    return {node_->grad.data(), node_->rows, node_->cols};
  }

  static Tensor make(Index r, Index c, std::vector<S> values, bool needs_grad) {
    Tensor t;
    t.node_ = std::make_shared<TensorNode<S>>();
    t.node_->rows = r;
    t.node_->cols = c;
    t.node_->values = std::move(values);
    t.node_->requires_grad = needs_grad;
    return t;
  }

private:
  static void check_size(Index r, Index c, std::size_t n) {
    if (static_cast<std::size_t>(r * c) != n)
      throw ShapeError("BadShape", "value count does not match shape");
  }

  std::shared_ptr<TensorNode<S>> node_;
};

// RAII guard: while alive, ops compute values but record no backward graph.
class NoGrad {
public:
  NoGrad() { ++depth(); }
  ~NoGrad() { --depth(); }
  NoGrad(const NoGrad&) = delete;
  static bool active() { return depth() > 0; }

private:
  static int& depth() {
    thread_local int d = 0;
    return d;
  }
};

namespace detail {

template <typename S>
bool any_grad(std::initializer_list<const Tensor<S>*> ts) {
  if (NoGrad::active()) return false;
  for (const auto* t : ts)
    if ((*t).requires_grad()) return true;
  return false;
}

template <typename S>
void accumulate(TensorNode<S>& parent, const Eigen::Ref<const EMat<S>>& g) {
  parent.ensure_grad();
  Eigen::Map<EMat<S>>(parent.grad.data(), parent.rows, parent.cols) += g;
}

template <typename S>
Eigen::Map<const EMat<S>> vmap(const TensorNode<S>& n) {
  return {n.values.data(), n.rows, n.cols};
}

template <typename S>
Eigen::Map<const EMat<S>> gmap(const TensorNode<S>& n) {
  return {n.grad.data(), n.rows, n.cols};
}

}  // namespace detail

// ---- backward -------------------------------------------------------------

// Reverse-mode sweep from a scalar loss. Reverse post-order over the recorded
// graph guarantees every consumer runs before its producers.
template <typename S>
void backward(const Tensor<S>& loss) {
  if (loss.numel() != 1) throw ShapeError("NotScalar", "backward() needs a scalar loss");
  TensorNode<S>* root = loss.node().get();
  std::vector<TensorNode<S>*> order;
  std::unordered_set<TensorNode<S>*> visited{root};
  struct Item {
    TensorNode<S>* n;
    std::size_t next = 0;
  };
  std::vector<Item> stack{{root, 0}};
  while (!stack.empty()) {
    Item& it = stack.back();
    if (it.next < it.n->parents.size()) {
      TensorNode<S>* p = it.n->parents[it.next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(it.n);
      stack.pop_back();
    }
  }
  root->ensure_grad();
  root->grad[0] += S(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
}

// ---- elementwise and linear algebra ----------------------------------------

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("BadShape", "add: shape mismatch");
  Tensor<S> out = Tensor<S>::zeros(a.rows(), a.cols());
  out.mat() = a.mat() + b.mat();
  if (detail::any_grad<S>({&a, &b})) {
    out.node()->requires_grad = true;
    out.node()->parents = {a.node(), b.node()};
    auto an = a.node(), bn = b.node();
    out.node()->backward_fn = [an, bn](TensorNode<S>& self) {
      if (an->requires_grad) detail::accumulate<S>(*an, detail::gmap(self));
      if (bn->requires_grad) detail::accumulate<S>(*bn, detail::gmap(self));
    };
  }
  return out;
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("BadShape", "sub: shape mismatch");
  Tensor<S> out = Tensor<S>::zeros(a.rows(), a.cols());
  out.mat() = a.mat() - b.mat();
  if (detail::any_grad<S>({&a, &b})) {
    out.node()->requires_grad = true;
    out.node()->parents = {a.node(), b.node()};
    auto an = a.node(), bn = b.node();
    out.node()->backward_fn = [an, bn](TensorNode<S>& self) {
      if (an->requires_grad) detail::accumulate<S>(*an, detail::gmap(self));
      if (bn->requires_grad) detail::accumulate<S>(*bn, EMat<S>(-detail::gmap(self)));
    };
  }
  return out;
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("BadShape", "mul: shape mismatch");
  Tensor<S> out = Tensor<S>::zeros(a.rows(), a.cols());
  out.mat() = a.mat().cwiseProduct(b.mat());
  if (detail::any_grad<S>({&a, &b})) {
    out.node()->requires_grad = true;
    out.node()->parents = {a.node(), b.node()};
    auto an = a.node(), bn = b.node();
    out.node()->backward_fn = [an, bn](TensorNode<S>& self) {
      if (an->requires_grad)
        detail::accumulate<S>(*an, EMat<S>(detail::gmap(self).cwiseProduct(detail::vmap(*bn))));
      if (bn->requires_grad)
        detail::accumulate<S>(*bn, EMat<S>(detail::gmap(self).cwiseProduct(detail::vmap(*an))));
    };
  }
  return out;
}

template <typename S>
Tensor<S> scale(const Tensor<S>& a, S c) {
  Tensor<S> out = Tensor<S>::zeros(a.rows(), a.cols());
  out.mat() = a.mat() * c;
  if (detail::any_grad<S>({&a})) {
    out.node()->requires_grad = true;
    out.node()->parents = {a.node()};
    auto an = a.node();
    out.node()->backward_fn = [an, c](TensorNode<S>& self) {
      detail::accumulate<S>(*an, EMat<S>(detail::gmap(self) * c));
    };
  }
  return out;
}

// broadcast a [1 x c] row over every row of m
template <typename S>
Tensor<S> add_rowvec(const Tensor<S>& m, const Tensor<S>& v) {
  if (v.rows() != 1 || v.cols() != m.cols())
    throw ShapeError("BadShape", "add_rowvec: need [1 x cols]");
  Tensor<S> out = Tensor<S>::zeros(m.rows(), m.cols());
  out.mat() = m.mat().rowwise() + v.mat().row(0);
  if (detail::any_grad<S>({&m, &v})) {
    out.node()->requires_grad = true;
    out.node()->parents = {m.node(), v.node()};
    auto mn = m.node(), vn = v.node();
    out.node()->backward_fn = [mn, vn](TensorNode<S>& self) {
      if (mn->requires_grad) detail::accumulate<S>(*mn, detail::gmap(self));
      if (vn->requires_grad)
        detail::accumulate<S>(*vn, EMat<S>(detail::gmap(self).colwise().sum()));
    };
  }
  return out;
}

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.cols() != b.rows()) throw ShapeError("BadShape", "matmul: inner dims differ");
  Tensor<S> out = Tensor<S>::zeros(a.rows(), b.cols());
  out.mat().noalias() = a.mat() * b.mat();
  if (detail::any_grad<S>({&a, &b})) {
    out.node()->requires_grad = true;
    out.node()->parents = {a.node(), b.node()};
    auto an = a.node(), bn = b.node();
    out.node()->backward_fn = [an, bn](TensorNode<S>& self) {
      if (an->requires_grad)
        detail::accumulate<S>(*an, EMat<S>(detail::gmap(self) * detail::vmap(*bn).transpose()));
      if (bn->requires_grad)
        detail::accumulate<S>(*bn, EMat<S>(detail::vmap(*an).transpose() * detail::gmap(self)));
    };
  }
  return out;
}

// a * b^T without materializing the transpose
template <typename S>
Tensor<S> matmul_nt(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.cols() != b.cols()) throw ShapeError("BadShape", "matmul_nt: inner dims differ");
  Tensor<S> out = Tensor<S>::zeros(a.rows(), b.rows());
  out.mat().noalias() = a.mat() * b.mat().transpose();
  if (detail::any_grad<S>({&a, &b})) {
    out.node()->requires_grad = true;
    out.node()->parents = {a.node(), b.node()};
    auto an = a.node(), bn = b.node();
    out.node()->backward_fn = [an, bn](TensorNode<S>& self) {
      if (an->requires_grad)
        detail::accumulate<S>(*an, EMat<S>(detail::gmap(self) * detail::vmap(*bn)));
      if (bn->requires_grad)
        detail::accumulate<S>(*bn, EMat<S>(detail::gmap(self).transpose() * detail::vmap(*an)));
    };
  }
  return out;
}

template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& bias) {
  return add_rowvec(matmul(x, w), bias);
}

// ---- nonlinearities --------------------------------------------------------

// exact GELU via the C library erf (correctly rounded, far below the 1e-7 bar)
template <typename S>
Tensor<S> gelu(const Tensor<S>& x) {
  Tensor<S> out = Tensor<S>::zeros(x.rows(), x.cols());
  const auto& xv = x.values();
  auto& ov = out.values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    double t = static_cast<double>(xv[i]);
    ov[i] = static_cast<S>(0.5 * t * (1.0 + std::erf(t * 0.7071067811865475244)));
  }
  if (detail::any_grad<S>({&x})) {
    out.node()->requires_grad = true;
    out.node()->parents = {x.node()};
    auto xn = x.node();
    out.node()->backward_fn = [xn](TensorNode<S>& self) {
      xn->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        double t = static_cast<double>(xn->values[i]);
        double cdf = 0.5 * (1.0 + std::erf(t * 0.7071067811865475244));
        double pdf = 0.3989422804014326779 * std::exp(-0.5 * t * t);
        xn->grad[i] += static_cast<S>((cdf + t * pdf)) * self.grad[i];
      }
    };
  }
  return out;
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& x) {
  Tensor<S> out = Tensor<S>::zeros(x.rows(), x.cols());
  const auto& xv = x.values();
  auto& ov = out.values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    S v = xv[i];
    if (v >= S(0)) {
      ov[i] = S(1) / (S(1) + std::exp(-v));
    } else {
      S e = std::exp(v);
      ov[i] = e / (S(1) + e);
    }
  }
  if (detail::any_grad<S>({&x})) {
    out.node()->requires_grad = true;
    out.node()->parents = {x.node()};
    auto xn = x.node();
    out.node()->backward_fn = [xn](TensorNode<S>& self) {
      xn->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        S y = self.values[i];
        xn->grad[i] += self.grad[i] * y * (S(1) - y);
      }
    };
  }
  return out;
}

// ---- softmax ----------------------------------------------------------------

// Row softmax with -inf mask sentinels: masked entries come out exactly 0.
// A row with no finite entry is an error, not a NaN.
template <typename S>
Tensor<S> softmax_rows(const Tensor<S>& x) {
  const Index r = x.rows(), c = x.cols();
  Tensor<S> out = Tensor<S>::zeros(r, c);
  const S neg_inf = -std::numeric_limits<S>::infinity();
  for (Index i = 0; i < r; ++i) {
    S mx = neg_inf;
    for (Index j = 0; j < c; ++j) mx = std::max(mx, x.at(i, j));
    if (!(mx > neg_inf)) throw NumericError("AllMaskedRow", "softmax row " + std::to_string(i) + " fully masked");
    S denom = S(0);
    for (Index j = 0; j < c; ++j) {
      S v = x.at(i, j);
      S e = (v == neg_inf) ? S(0) : std::exp(v - mx);
      out.values()[static_cast<std::size_t>(i * c + j)] = e;
      denom += e;
    }
    for (Index j = 0; j < c; ++j) out.values()[static_cast<std::size_t>(i * c + j)] /= denom;
  }
  if (detail::any_grad<S>({&x})) {
    out.node()->requires_grad = true;
    out.node()->parents = {x.node()};
    auto xn = x.node();
    out.node()->backward_fn = [xn, r, c](TensorNode<S>& self) {
      xn->ensure_grad();
      for (Index i = 0; i < r; ++i) {
        S dot = S(0);
        for (Index j = 0; j < c; ++j) {
          std::size_t k = static_cast<std::size_t>(i * c + j);
          dot += self.grad[k] * self.values[k];
        }
        for (Index j = 0; j < c; ++j) {
          std::size_t k = static_cast<std::size_t>(i * c + j);
          xn->grad[k] += self.values[k] * (self.grad[k] - dot);
        }
      }
    };
  }
  return out;
}

// ---- normalization -----------------------------------------------------------

inline constexpr double kLayerNormEps = 1e-5;

template <typename S>
Tensor<S> layer_norm(const Tensor<S>& x, const Tensor<S>& gain, const Tensor<S>& bias) {
  const Index r = x.rows(), c = x.cols();
  if (gain.rows() != 1 || gain.cols() != c || bias.rows() != 1 || bias.cols() != c)
    throw ShapeError("BadShape", "layer_norm: gain/bias must be [1 x cols]");
  Tensor<S> out = Tensor<S>::zeros(r, c);
  std::vector<S> inv_std(static_cast<std::size_t>(r));
  std::vector<S> xhat(static_cast<std::size_t>(r * c));
  for (Index i = 0; i < r; ++i) {
    S mean = S(0);
    for (Index j = 0; j < c; ++j) mean += x.at(i, j);
    mean /= static_cast<S>(c);
    S var = S(0);
    for (Index j = 0; j < c; ++j) {
      S d = x.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<S>(c);
    S is = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEps));
    inv_std[static_cast<std::size_t>(i)] = is;
    for (Index j = 0; j < c; ++j) {
      std::size_t k = static_cast<std::size_t>(i * c + j);
      xhat[k] = (x.at(i, j) - mean) * is;
      out.values()[k] = xhat[k] * gain.at(0, j) + bias.at(0, j);
    }
  }
  if (detail::any_grad<S>({&x, &gain, &bias})) {
    out.node()->requires_grad = true;
    out.node()->parents = {x.node(), gain.node(), bias.node()};
    auto xn = x.node(), gn = gain.node(), bn = bias.node();
    out.node()->backward_fn = [xn, gn, bn, r, c, inv_std = std::move(inv_std),
                               xhat = std::move(xhat)](TensorNode<S>& self) {
      if (gn->requires_grad) {
        gn->ensure_grad();
        for (Index i = 0; i < r; ++i)
          for (Index j = 0; j < c; ++j) {
            std::size_t k = static_cast<std::size_t>(i * c + j);
            gn->grad[static_cast<std::size_t>(j)] += self.grad[k] * xhat[k];
          }
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (Index i = 0; i < r; ++i)
          for (Index j = 0; j < c; ++j)
            bn->grad[static_cast<std::size_t>(j)] += self.grad[static_cast<std::size_t>(i * c + j)];
      }
      if (xn->requires_grad) {
        xn->ensure_grad();
        for (Index i = 0; i < r; ++i) {
          S sum_d = S(0), sum_dx = S(0);
          for (Index j = 0; j < c; ++j) {
            std::size_t k = static_cast<std::size_t>(i * c + j);
            S d = self.grad[k] * gn->values[static_cast<std::size_t>(j)];
            sum_d += d;
            sum_dx += d * xhat[k];
          }
          S is = inv_std[static_cast<std::size_t>(i)];
          for (Index j = 0; j < c; ++j) {
            std::size_t k = static_cast<std::size_t>(i * c + j);
            S d = self.grad[k] * gn->values[static_cast<std::size_t>(j)];
            xn->grad[k] += is * (d - sum_d / static_cast<S>(c) - xhat[k] * sum_dx / static_cast<S>(c));
          }
        }
      }
    };
  }
  return out;
}

// ---- gathers / reshuffles -----------------------------------------------------

template <typename S>
Tensor<S> take_rows(const Tensor<S>& x, std::vector<int> ids) {
  const Index c = x.cols();
  Tensor<S> out = Tensor<S>::zeros(static_cast<Index>(ids.size()), c);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    int id = ids[i];
    if (id < 0 || id >= x.rows())
      throw ShapeError("BadIndex", "take_rows: row " + std::to_string(id) + " out of range");
    out.mat().row(static_cast<Index>(i)) = x.mat().row(id);
  }
  if (detail::any_grad<S>({&x})) {
    out.node()->requires_grad = true;
    out.node()->parents = {x.node()};
    auto xn = x.node();
    out.node()->backward_fn = [xn, ids = std::move(ids), c](TensorNode<S>& self) {
      xn->ensure_grad();
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (Index j = 0; j < c; ++j)
          xn->grad[static_cast<std::size_t>(ids[i] * c + j)] +=
              self.grad[static_cast<std::size_t>(static_cast<Index>(i) * c + j)];
    };
  }
  return out;
}

template <typename S>
Tensor<S> slice_cols(const Tensor<S>& x, Index c0, Index w) {
  if (c0 < 0 || w <= 0 || c0 + w > x.cols()) throw ShapeError("BadShape", "slice_cols out of range");
  Tensor<S> out = Tensor<S>::zeros(x.rows(), w);
  out.mat() = x.mat().middleCols(c0, w);
  if (detail::any_grad<S>({&x})) {
    out.node()->requires_grad = true;
    out.node()->parents = {x.node()};
    auto xn = x.node();
    out.node()->backward_fn = [xn, c0, w](TensorNode<S>& self) {
      xn->ensure_grad();
      Eigen::Map<EMat<S>>(xn->grad.data(), xn->rows, xn->cols).middleCols(c0, w) +=
          detail::gmap(self);
    };
  }
  return out;
}

template <typename S>
Tensor<S> concat_cols(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw ShapeError("BadShape", "concat_cols: empty");
  Index r = parts[0].rows(), c = 0;
  bool needs_grad = false;
  for (const auto& p : parts) {
    if (p.rows() != r) throw ShapeError("BadShape", "concat_cols: row mismatch");
    c += p.cols();
    needs_grad = needs_grad || p.requires_grad();
  }
  Tensor<S> out = Tensor<S>::zeros(r, c);
  Index off = 0;
  for (const auto& p : parts) {
    out.mat().middleCols(off, p.cols()) = p.mat();
    off += p.cols();
  }
  if (needs_grad) {
    out.node()->requires_grad = true;
    std::vector<std::shared_ptr<TensorNode<S>>> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    out.node()->parents = nodes;
    out.node()->backward_fn = [nodes](TensorNode<S>& self) {
      Index off2 = 0;
      for (const auto& n : nodes) {
        if (n->requires_grad) {
          n->ensure_grad();
          Eigen::Map<EMat<S>>(n->grad.data(), n->rows, n->cols) +=
              detail::gmap(self).middleCols(off2, n->cols);
        }
        off2 += n->cols;
      }
    };
  }
  return out;
}

// ---- reductions -----------------------------------------------------------------

template <typename S>
Tensor<S> mean_rows(const Tensor<S>& x) {
  const Index r = x.rows(), c = x.cols();
  Tensor<S> out = Tensor<S>::zeros(1, c);
  out.mat() = x.mat().colwise().mean();
  if (detail::any_grad<S>({&x})) {
    out.node()->requires_grad = true;
    out.node()->parents = {x.node()};
    auto xn = x.node();
    out.node()->backward_fn = [xn, r](TensorNode<S>& self) {
      xn->ensure_grad();
      Eigen::Map<EMat<S>>(xn->grad.data(), xn->rows, xn->cols).rowwise() +=
          (detail::gmap(self) / static_cast<S>(r)).row(0);
    };
  }
  return out;
}

template <typename S>
Tensor<S> sum_all(const Tensor<S>& x) {
  Tensor<S> out = Tensor<S>::scalar(x.mat().sum());
  if (detail::any_grad<S>({&x})) {
    out.node()->requires_grad = true;
    out.node()->parents = {x.node()};
    auto xn = x.node();
    out.node()->backward_fn = [xn](TensorNode<S>& self) {
      xn->ensure_grad();
      S g = self.grad[0];
      for (auto& v : xn->grad) v += g;
    };
  }
  return out;
}

template <typename S>
Tensor<S> mean_all(const Tensor<S>& x) {
  return scale(sum_all(x), S(1) / static_cast<S>(x.numel()));
}

// ---- losses --------------------------------------------------------------------

// mean -log softmax(logits)[target] over rows; stable log-sum-exp
template <typename S>
Tensor<S> cross_entropy_mean(const Tensor<S>& logits, const std::vector<int>& targets) {
  const Index n = logits.rows(), v = logits.cols();
  if (static_cast<Index>(targets.size()) != n)
    throw ShapeError("BadShape", "cross_entropy: target count mismatch");
  for (int t : targets)
    if (t < 0 || t >= v)
      throw ShapeError("IndexOutOfVocab", "target " + std::to_string(t) + " out of vocab");
  std::vector<S> probs(static_cast<std::size_t>(n * v));
  S total = S(0);
  for (Index i = 0; i < n; ++i) {
    S mx = logits.at(i, 0);
    for (Index j = 1; j < v; ++j) mx = std::max(mx, logits.at(i, j));
    S denom = S(0);
    for (Index j = 0; j < v; ++j) {
      S e = std::exp(logits.at(i, j) - mx);
      probs[static_cast<std::size_t>(i * v + j)] = e;
      denom += e;
    }
    for (Index j = 0; j < v; ++j) probs[static_cast<std::size_t>(i * v + j)] /= denom;
    total += std::log(denom) + mx - logits.at(i, targets[static_cast<std::size_t>(i)]);
  }
  Tensor<S> out = Tensor<S>::scalar(total / static_cast<S>(n));
  if (detail::any_grad<S>({&logits})) {
    out.node()->requires_grad = true;
    out.node()->parents = {logits.node()};
    auto ln = logits.node();
    out.node()->backward_fn = [ln, targets, probs = std::move(probs), n, v](TensorNode<S>& self) {
      ln->ensure_grad();
      S g = self.grad[0] / static_cast<S>(n);
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < v; ++j) {
          std::size_t k = static_cast<std::size_t>(i * v + j);
          S p = probs[k];
          S ind = (j == targets[static_cast<std::size_t>(i)]) ? S(1) : S(0);
          ln->grad[k] += g * (p - ind);
        }
      }
    };
  }
  return out;
}

inline constexpr double kBceClamp = 1e-7;

// mean soft-target binary cross-entropy over a column of probabilities;
// probabilities are clamped to [eps, 1-eps] and the clamp gates the gradient
template <typename S>
Tensor<S> soft_bce_mean(const Tensor<S>& p, const std::vector<S>& q) {
  const Index n = p.numel();
  if (static_cast<Index>(q.size()) != n) throw ShapeError("BadShape", "soft_bce: target count mismatch");
  const S eps = static_cast<S>(kBceClamp);
  S total = S(0);
  for (Index i = 0; i < n; ++i) {
    S qi = q[static_cast<std::size_t>(i)];
    if (qi < S(0) || qi > S(1)) throw ShapeError("BadValue", "soft target outside [0,1]");
    S pc = std::min(std::max(p.values()[static_cast<std::size_t>(i)], eps), S(1) - eps);
    total += -(qi * std::log(pc) + (S(1) - qi) * std::log(S(1) - pc));
  }
  Tensor<S> out = Tensor<S>::scalar(total / static_cast<S>(n));
  if (detail::any_grad<S>({&p})) {
    out.node()->requires_grad = true;
    out.node()->parents = {p.node()};
    auto pn = p.node();
    out.node()->backward_fn = [pn, q, n, eps](TensorNode<S>& self) {
      pn->ensure_grad();
      S g = self.grad[0] / static_cast<S>(n);
      for (Index i = 0; i < n; ++i) {
        S pv = pn->values[static_cast<std::size_t>(i)];
        if (pv <= eps || pv >= S(1) - eps) continue;  // clamped region: flat
        S qi = q[static_cast<std::size_t>(i)];
        pn->grad[static_cast<std::size_t>(i)] += g * (-(qi / pv) + (S(1) - qi) / (S(1) - pv));
      }
    };
  }
  return out;
}

// multiply every entry by a [1x1] tensor (gradient flows to both sides)
template <typename S>
Tensor<S> mul_scalar_t(const Tensor<S>& x, const Tensor<S>& s) {
  if (s.numel() != 1) throw ShapeError("BadShape", "mul_scalar_t: scalar must be [1x1]");
  Tensor<S> out = Tensor<S>::zeros(x.rows(), x.cols());
  out.mat() = x.mat() * s.values()[0];
  if (detail::any_grad<S>({&x, &s})) {
    out.node()->requires_grad = true;
    out.node()->parents = {x.node(), s.node()};
    auto xn = x.node(), sn = s.node();
    out.node()->backward_fn = [xn, sn](TensorNode<S>& self) {
      if (xn->requires_grad)
        detail::accumulate<S>(*xn, EMat<S>(detail::gmap(self) * sn->values[0]));
      if (sn->requires_grad) {
        sn->ensure_grad();
        S acc = S(0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * xn->values[i];
        sn->grad[0] += acc;
      }
    };
  }
  return out;
}

// ---- attention -------------------------------------------------------------------

// Scaled dot-product attention over already-projected per-head matrices.
// bias: additive [n x m] (may be undefined); mask: additive 0/-inf constant
// [n x m] (may be undefined). Composed from recorded primitives, so the
// backward pass needs no dedicated code. Returns (weights, context).
template <typename S>
std::pair<Tensor<S>, Tensor<S>> attention_with_weights(const Tensor<S>& q, const Tensor<S>& k,
                                                       const Tensor<S>& v, const Tensor<S>& bias,
                                                       const Tensor<S>& mask) {
  if (q.cols() != k.cols() || k.rows() != v.rows())
    throw ShapeError("BadShape", "attention: Q/K/V shapes incompatible");
  Tensor<S> logits = scale(matmul_nt(q, k), S(1) / std::sqrt(static_cast<S>(q.cols())));
  if (bias.defined()) logits = add(logits, bias);
  if (mask.defined()) logits = add(logits, mask);
  Tensor<S> weights = softmax_rows(logits);
  return {weights, matmul(weights, v)};
}

template <typename S>
Tensor<S> masked_biased_attention(const Tensor<S>& q, const Tensor<S>& k, const Tensor<S>& v,
                                  const Tensor<S>& bias, const Tensor<S>& mask) {
  return attention_with_weights(q, k, v, bias, mask).second;
}

// out[i][j] = table_row[codes[i*n+j]]; negative codes (the CROSS sentinel)
// contribute exactly 0 and never touch the table, forward or backward.
template <typename S>
Tensor<S> gather_bias(const Tensor<S>& table_row, const std::vector<int>& codes, Index n) {
  if (table_row.rows() != 1) throw ShapeError("BadShape", "gather_bias: table row must be [1 x K]");
  if (static_cast<Index>(codes.size()) != n * n) throw ShapeError("BadShape", "gather_bias: code count");
  Tensor<S> out = Tensor<S>::zeros(n, n);
  const Index k = table_row.cols();
  for (Index i = 0; i < n * n; ++i) {
    int code = codes[static_cast<std::size_t>(i)];
    if (code < 0) continue;
    if (code >= k) throw ShapeError("BadIndex", "gather_bias: code out of range");
    out.values()[static_cast<std::size_t>(i)] = table_row.values()[static_cast<std::size_t>(code)];
  }
  if (detail::any_grad<S>({&table_row})) {
    out.node()->requires_grad = true;
    out.node()->parents = {table_row.node()};
    auto tn = table_row.node();
    out.node()->backward_fn = [tn, codes, n](TensorNode<S>& self) {
      tn->ensure_grad();
      for (Index i = 0; i < n * n; ++i) {
        int code = codes[static_cast<std::size_t>(i)];
        if (code >= 0) tn->grad[static_cast<std::size_t>(code)] += self.grad[static_cast<std::size_t>(i)];
      }
    };
  }
  return out;
}

// 0 where allowed, -inf where masked
template <typename S>
Tensor<S> additive_mask(const std::vector<std::uint8_t>& allowed, Index r, Index c) {
  Tensor<S> m = Tensor<S>::zeros(r, c);
  const S neg_inf = -std::numeric_limits<S>::infinity();
  for (Index i = 0; i < r * c; ++i)
    if (!allowed[static_cast<std::size_t>(i)]) m.values()[static_cast<std::size_t>(i)] = neg_inf;
  return m;
}

}  // namespace reacfuse::core

#endif
