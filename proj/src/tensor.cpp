#include "synthlab/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <utility>

namespace synthlab::tensor {

namespace {

thread_local bool g_grad_enabled = true;

void check_finite(const ArrayXd& x, const char* where) {
  if (!x.allFinite()) throw NumericError(std::string(where) + ": non-finite value produced");
}

long shape_product(const std::vector<long>& shape) {
  long p = 1;
  for (long d : shape) {
    if (d <= 0) throw ShapeError("tensor shape dimensions must be positive");
    p *= d;
  }
  return p;
}

// Tape entry factory: drops parents/backward when no input needs gradients,
// so inference chains free intermediates eagerly.
Tensor make_node(std::vector<long> shape, ArrayXd data,
                 std::vector<Tensor> parents, BackwardFn fn,
                 const char* where) {
  check_finite(data, where);
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  if (g_grad_enabled) {
    for (const auto& p : parents)
      if (p->requires_grad) {
        n->requires_grad = true;
        break;
      }
  }
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(fn);
  }
  return n;
}

Eigen::Map<MatrixRM> as_mat(ArrayXd& buf, long r, long c) {
  return Eigen::Map<MatrixRM>(buf.data(), r, c);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (a->shape != b->shape)
    throw ShapeError(std::string(where) + ": operand shapes differ");
}

// true when b is a rank-1 bias broadcast across the rows of rank-2 a
bool is_row_broadcast(const Tensor& a, const Tensor& b) {
  return a->rank() == 2 && b->rank() == 1 && b->cols() == a->cols();
}

}  // namespace

ArrayXd& GradCtx::buf(Node& n) {
  if (leaf_sink != nullptr && n.is_leaf()) {
    auto& slot = (*leaf_sink)[&n];
    if (slot.size() != n.data.size()) slot = ArrayXd::Zero(n.data.size());
    return slot;
  }
  return n.ensure_grad();
}

// --- construction -----------------------------------------------------------

Tensor make_tensor(std::vector<long> shape, ArrayXd data, bool requires_grad) {
  if (shape.empty() || shape.size() > 2)
    throw ShapeError("make_tensor: rank must be 1 or 2");
  if (shape_product(shape) != data.size())
    throw ShapeError("make_tensor: shape does not match data length");
  check_finite(data, "make_tensor");
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  if (requires_grad) n->ensure_grad();
  return n;
}

Tensor from_matrix(const MatrixRM& m, bool requires_grad) {
  ArrayXd flat = Eigen::Map<const ArrayXd>(m.data(), m.size());
  return make_tensor({m.rows(), m.cols()}, std::move(flat), requires_grad);
}

Tensor from_vector(const ArrayXd& v, bool requires_grad) {
  return make_tensor({static_cast<long>(v.size())}, v, requires_grad);
}

Tensor from_list(std::initializer_list<double> v, bool requires_grad) {
  ArrayXd data(static_cast<long>(v.size()));
  long i = 0;
  for (double x : v) data[i++] = x;
  return make_tensor({static_cast<long>(v.size())}, std::move(data), requires_grad);
}

Tensor zeros(std::vector<long> shape, bool requires_grad) {
  long n = shape_product(shape);
  return make_tensor(std::move(shape), ArrayXd::Zero(n), requires_grad);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

// --- operations ---------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a->rank() != 2 || b->rank() != 2)
    throw ShapeError("matmul: both operands must be rank-2");
  const long m = a->shape[0], k = a->shape[1], n = b->shape[1];
  if (b->shape[0] != k) throw ShapeError("matmul: inner dimensions disagree");
  ArrayXd out(m * n);
  as_mat(out, m, n).noalias() = a->mat() * b->mat();
  return make_node(
      {m, n}, std::move(out), {a, b},
      [m, k, n](Node& self, GradCtx& ctx) {
        auto gc = Eigen::Map<const MatrixRM>(self.grad.data(), m, n);
        Node& pa = *self.parents[0];
        Node& pb = *self.parents[1];
        if (pa.requires_grad)
          as_mat(ctx.buf(pa), m, k).noalias() += gc * pb.mat().transpose();
        if (pb.requires_grad)
          as_mat(ctx.buf(pb), k, n).noalias() += pa.mat().transpose() * gc;
      },
      "matmul");
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (is_row_broadcast(a, b)) {
    const long r = a->shape[0], c = a->shape[1];
    ArrayXd out(r * c);
    as_mat(out, r, c) = a->mat().rowwise() + b->mat().row(0);
    return make_node(
        {r, c}, std::move(out), {a, b},
        [r, c](Node& self, GradCtx& ctx) {
          auto gc = Eigen::Map<const MatrixRM>(self.grad.data(), r, c);
          Node& pa = *self.parents[0];
          Node& pb = *self.parents[1];
          if (pa.requires_grad) ctx.buf(pa) += self.grad;
          if (pb.requires_grad)
            as_mat(ctx.buf(pb), 1, c).noalias() += gc.colwise().sum();
        },
        "add");
  }
  require_same_shape(a, b, "add");
  return make_node(
      a->shape, a->data + b->data, {a, b},
      [](Node& self, GradCtx& ctx) {
        for (int i = 0; i < 2; ++i) {
          Node& p = *self.parents[i];
          if (p.requires_grad) ctx.buf(p) += self.grad;
        }
      },
      "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (is_row_broadcast(a, b)) {
    const long r = a->shape[0], c = a->shape[1];
    ArrayXd out(r * c);
    as_mat(out, r, c) = a->mat().rowwise() - b->mat().row(0);
    return make_node(
        {r, c}, std::move(out), {a, b},
        [r, c](Node& self, GradCtx& ctx) {
          auto gc = Eigen::Map<const MatrixRM>(self.grad.data(), r, c);
          Node& pa = *self.parents[0];
          Node& pb = *self.parents[1];
          if (pa.requires_grad) ctx.buf(pa) += self.grad;
          if (pb.requires_grad)
            as_mat(ctx.buf(pb), 1, c).noalias() -= gc.colwise().sum();
        },
        "sub");
  }
  require_same_shape(a, b, "sub");
  return make_node(
      a->shape, a->data - b->data, {a, b},
      [](Node& self, GradCtx& ctx) {
        Node& pa = *self.parents[0];
        Node& pb = *self.parents[1];
        if (pa.requires_grad) ctx.buf(pa) += self.grad;
        if (pb.requires_grad) ctx.buf(pb) -= self.grad;
      },
      "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  return make_node(
      a->shape, a->data * b->data, {a, b},
      [](Node& self, GradCtx& ctx) {
        Node& pa = *self.parents[0];
        Node& pb = *self.parents[1];
        if (pa.requires_grad) ctx.buf(pa) += self.grad * pb.data;
        if (pb.requires_grad) ctx.buf(pb) += self.grad * pa.data;
      },
      "mul");
}

Tensor scale(const Tensor& a, double s) {
  if (!std::isfinite(s)) throw NumericError("scale: factor must be finite");
  return make_node(
      a->shape, a->data * s, {a},
      [s](Node& self, GradCtx& ctx) {
        Node& pa = *self.parents[0];
        if (pa.requires_grad) ctx.buf(pa) += self.grad * s;
      },
      "scale");
}

Tensor add_scalar(const Tensor& a, double c) {
  if (!std::isfinite(c)) throw NumericError("add_scalar: addend must be finite");
  return make_node(
      a->shape, a->data + c, {a},
      [](Node& self, GradCtx& ctx) {
        Node& pa = *self.parents[0];
        if (pa.requires_grad) ctx.buf(pa) += self.grad;
      },
      "add_scalar");
}

Tensor transpose(const Tensor& a) {
  if (a->rank() != 2) throw ShapeError("transpose: operand must be rank-2");
  const long r = a->shape[0], c = a->shape[1];
  ArrayXd out(r * c);
  as_mat(out, c, r) = a->mat().transpose();
  return make_node(
      {c, r}, std::move(out), {a},
      [r, c](Node& self, GradCtx& ctx) {
        Node& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        auto gc = Eigen::Map<const MatrixRM>(self.grad.data(), c, r);
        as_mat(ctx.buf(pa), r, c).noalias() += gc.transpose();
      },
      "transpose");
}

Tensor slice_rows(const Tensor& a, long r0, long r1) {
  if (a->rank() != 2) throw ShapeError("slice_rows: operand must be rank-2");
  const long r = a->shape[0], c = a->shape[1];
  if (r0 < 0 || r1 > r || r0 >= r1) throw ShapeError("slice_rows: bad range");
  const long h = r1 - r0;
  ArrayXd out(h * c);
  as_mat(out, h, c) = a->mat().middleRows(r0, h);
  return make_node(
      {h, c}, std::move(out), {a},
      [r, c, r0, h](Node& self, GradCtx& ctx) {
        Node& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        auto gc = Eigen::Map<const MatrixRM>(self.grad.data(), h, c);
        as_mat(ctx.buf(pa), r, c).middleRows(r0, h) += gc;
      },
      "slice_rows");
}

Tensor slice_cols(const Tensor& a, long c0, long c1) {
  if (a->rank() != 2) throw ShapeError("slice_cols: operand must be rank-2");
  const long r = a->shape[0], c = a->shape[1];
  if (c0 < 0 || c1 > c || c0 >= c1) throw ShapeError("slice_cols: bad range");
  const long w = c1 - c0;
  ArrayXd out(r * w);
  as_mat(out, r, w) = a->mat().middleCols(c0, w);
  return make_node(
      {r, w}, std::move(out), {a},
      [r, c, c0, w](Node& self, GradCtx& ctx) {
        Node& pa = *self.parents[0];
        if (!pa.requires_grad) return;
        auto gc = Eigen::Map<const MatrixRM>(self.grad.data(), r, w);
        as_mat(ctx.buf(pa), r, c).middleCols(c0, w) += gc;
      },
      "slice_cols");
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no parts");
  const long c = parts[0]->cols();
  long total = 0;
  for (const auto& p : parts) {
    if (p->rank() != 2 || p->cols() != c)
      throw ShapeError("concat_rows: parts must be rank-2 with equal column counts");
    total += p->shape[0];
  }
  ArrayXd out(total * c);
  long at = 0;
  for (const auto& p : parts) {
    as_mat(out, total, c).middleRows(at, p->shape[0]) = p->mat();
    at += p->shape[0];
  }
  return make_node(
      {total, c}, std::move(out), parts,
      [total, c](Node& self, GradCtx& ctx) {
        auto gc = Eigen::Map<const MatrixRM>(self.grad.data(), total, c);
        long at = 0;
        for (auto& pp : self.parents) {
          Node& p = *pp;
          const long h = p.shape[0];
          if (p.requires_grad)
            as_mat(ctx.buf(p), h, c) += gc.middleRows(at, h);
          at += h;
        }
      },
      "concat_rows");
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no parts");
  const long r = parts[0]->rows();
  long total = 0;
  for (const auto& p : parts) {
    if (p->rank() != 2 || p->shape[0] != r)
      throw ShapeError("concat_cols: parts must be rank-2 with equal row counts");
    total += p->shape[1];
  }
  ArrayXd out(r * total);
  long at = 0;
  for (const auto& p : parts) {
    as_mat(out, r, total).middleCols(at, p->shape[1]) = p->mat();
    at += p->shape[1];
  }
  return make_node(
      {r, total}, std::move(out), parts,
      [r, total](Node& self, GradCtx& ctx) {
        auto gc = Eigen::Map<const MatrixRM>(self.grad.data(), r, total);
        long at = 0;
        for (auto& pp : self.parents) {
          Node& p = *pp;
          const long w = p.shape[1];
          if (p.requires_grad)
            as_mat(ctx.buf(p), r, w) += gc.middleCols(at, w);
          at += w;
        }
      },
      "concat_cols");
}

Tensor leaky_relu(const Tensor& x, double slope) {
  if (!(slope > 0)) throw ArgumentError("leaky_relu: slope must be positive");
  ArrayXd out = (x->data >= 0).select(x->data, x->data * slope);
  return make_node(
      x->shape, std::move(out), {x},
      [slope](Node& self, GradCtx& ctx) {
        Node& px = *self.parents[0];
        if (!px.requires_grad) return;
        // derivative: 1 for x >= 0 (subgradient 1 at 0), slope otherwise
        ArrayXd factor = slope + (1.0 - slope) * (px.data >= 0).cast<double>();
        ctx.buf(px) += self.grad * factor;
      },
      "leaky_relu");
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
  const long d = x->cols();
  if (d == 0) throw ShapeError("layer_norm: empty last axis");
  if (gamma->rank() != 1 || gamma->cols() != d || beta->rank() != 1 ||
      beta->cols() != d)
    throw ShapeError("layer_norm: gamma/beta must be rank-1 of the last-axis size");
  if (!(eps >= 0)) throw ArgumentError("layer_norm: eps must be nonnegative");
  const long n = x->rows();

  ArrayXd xhat(n * d);
  ArrayXd inv_std(n);
  ArrayXd out(n * d);
  auto xm = x->mat();
  auto xhat_m = as_mat(xhat, n, d);
  auto out_m = as_mat(out, n, d);
  for (long i = 0; i < n; ++i) {
    const auto row = xm.row(i).array();
    const double mu = row.mean();
    const double var = (row - mu).square().mean();  // population variance
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[i] = is;
    xhat_m.row(i) = ((row - mu) * is).matrix();
    out_m.row(i) =
        (xhat_m.row(i).array() * gamma->data.transpose() + beta->data.transpose())
            .matrix();
  }
  return make_node(
      x->shape, std::move(out), {x, gamma, beta},
      [n, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Node& self, GradCtx& ctx) {
        Node& px = *self.parents[0];
        Node& pg = *self.parents[1];
        Node& pb = *self.parents[2];
        auto gy = Eigen::Map<const MatrixRM>(self.grad.data(), n, d);
        auto xh = Eigen::Map<const MatrixRM>(xhat.data(), n, d);
        if (pg.requires_grad) {
          auto& gbuf = ctx.buf(pg);
          gbuf += (gy.array() * xh.array()).colwise().sum().transpose();
        }
        if (pb.requires_grad) {
          auto& bbuf = ctx.buf(pb);
          bbuf += gy.array().colwise().sum().transpose();
        }
        if (px.requires_grad) {
          auto gx = as_mat(ctx.buf(px), n, d);
          for (long i = 0; i < n; ++i) {
            const auto dy = gy.row(i).array();
            const auto xr = xh.row(i).array();
            const Eigen::ArrayXd dxhat =
                (dy * pg.data.transpose()).transpose();
            const double m1 = dxhat.mean();
            const double m2 = (dxhat * xr.transpose()).mean();
            gx.row(i) +=
                (inv_std[i] * (dxhat - m1 - xr.transpose() * m2)).matrix().transpose();
          }
        }
      },
      "layer_norm");
}

namespace {

Tensor softmax_impl(const Tensor& scores, const MaskArray* mask) {
  const long n = scores->rows(), d = scores->cols();
  if (d == 0) throw ShapeError("masked_softmax: empty last axis");
  if (mask != nullptr && mask->size() != scores->size())
    throw ShapeError("masked_softmax: mask size must match scores");
  ArrayXd out(n * d);
  auto sm = scores->mat();
  auto om = as_mat(out, n, d);
  for (long i = 0; i < n; ++i) {
    const auto row = sm.row(i).array();
    if (mask == nullptr) {
      const double mx = row.maxCoeff();
      om.row(i) = (row - mx).exp().matrix();
    } else {
      double mx = -std::numeric_limits<double>::infinity();
      for (long j = 0; j < d; ++j)
        if ((*mask)[i * d + j] && sm(i, j) > mx) mx = sm(i, j);
      if (!std::isfinite(mx))
        throw DegenerateRowError("masked_softmax: row has no live entries");
      for (long j = 0; j < d; ++j)
        om(i, j) = (*mask)[i * d + j] ? std::exp(sm(i, j) - mx) : 0.0;
    }
    const double z = om.row(i).sum();
    om.row(i) /= z;
  }
  return make_node(
      scores->shape, std::move(out), {scores},
      [n, d](Node& self, GradCtx& ctx) {
        Node& ps = *self.parents[0];
        if (!ps.requires_grad) return;
        auto p = Eigen::Map<const MatrixRM>(self.data.data(), n, d);
        auto gp = Eigen::Map<const MatrixRM>(self.grad.data(), n, d);
        auto gs = as_mat(ctx.buf(ps), n, d);
        for (long i = 0; i < n; ++i) {
          const double dot = (gp.row(i).array() * p.row(i).array()).sum();
          gs.row(i) +=
              (p.row(i).array() * (gp.row(i).array() - dot)).matrix();
        }
      },
      "masked_softmax");
}

}  // namespace

Tensor masked_softmax(const Tensor& scores, const MaskArray& mask) {
  return softmax_impl(scores, &mask);
}

Tensor masked_softmax(const Tensor& scores) { return softmax_impl(scores, nullptr); }

Tensor sum(const Tensor& a) {
  ArrayXd out(1);
  out[0] = a->data.sum();
  return make_node(
      {1}, std::move(out), {a},
      [](Node& self, GradCtx& ctx) {
        Node& pa = *self.parents[0];
        if (pa.requires_grad) ctx.buf(pa) += self.grad[0];
      },
      "sum");
}

// --- backward ----------------------------------------------------------------

namespace {

void backward_impl(const Tensor& loss, GradCtx& ctx) {
  if (!loss) throw ArgumentError("backward: null loss");
  if (loss->size() != 1) throw ShapeError("backward: loss must be scalar");

  // post-order DFS over parent edges
  std::vector<Node*> topo;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto [node, next] = stack.back();
    if (next < node->parents.size()) {
      stack.back().second = next + 1;
      Node* parent = node->parents[next].get();
      if (visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  // fresh dL/dnode for intermediates; leaves accumulate across calls
  for (Node* n : topo)
    if (!n->is_leaf()) n->grad = ArrayXd::Zero(n->data.size());

  ctx.buf(*loss) += 1.0;

  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->requires_grad && n->grad.size() != 0)
      n->backward_fn(*n, ctx);
  }
}

}  // namespace

void backward(const Tensor& loss) {
  GradCtx ctx;
  backward_impl(loss, ctx);
}

void backward(const Tensor& loss, std::unordered_map<Node*, ArrayXd>& sink) {
  GradCtx ctx;
  ctx.leaf_sink = &sink;
  backward_impl(loss, ctx);
}

void zero_grad(const std::vector<Tensor>& params) {
  for (const auto& p : params) p->grad = ArrayXd::Zero(p->data.size());
}

double grad_check(const std::function<Tensor()>& f,
                  const std::vector<Tensor>& params, double eps) {
  if (!(eps > 0) || eps > 1e-2)
    throw ArgumentError("grad_check: eps must lie in (0, 1e-2]");
  for (const auto& p : params) check_finite(p->data, "grad_check: parameter");

  zero_grad(params);
  backward(f());
  std::vector<ArrayXd> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p->ensure_grad());

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Node& p = *params[pi];
    for (long i = 0; i < p.size(); ++i) {
      const double orig = p.data[i];
      p.data[i] = orig + eps;
      const double up = f()->data[0];
      p.data[i] = orig - eps;
      const double down = f()->data[0];
      p.data[i] = orig;
      const double cd = (up - down) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double rel =
          std::abs(a - cd) / std::max({std::abs(a), std::abs(cd), 1e-8});
      if (rel > worst) worst = rel;
    }
  }
  return worst;
}

}  // namespace synthlab::tensor
