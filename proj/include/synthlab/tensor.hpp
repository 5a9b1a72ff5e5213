#pragma once

#include <Eigen/Dense>
#include <functional>
#include <initializer_list>
#include <memory>
#include <unordered_map>
#include <vector>

#include "synthlab/errors.hpp"

namespace synthlab::tensor {

using Eigen::ArrayXd;
using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

class Node;
using Tensor = std::shared_ptr<Node>;

// Redirects leaf-gradient accumulation during backward. When `leaf_sink` is
// set, gradients of leaf nodes (parameters) land in the sink map instead of
// the node's own buffer, so concurrent per-row backward passes never touch
// shared parameter state.
struct GradCtx {
  std::unordered_map<Node*, ArrayXd>* leaf_sink = nullptr;
  ArrayXd& buf(Node& n);
};

using BackwardFn = std::function<void(Node&, GradCtx&)>;

// One tape entry: a dense rank-1/rank-2 value plus the closure that pulls its
// output gradient back onto its parents. Values are immutable after creation
// except for the grad buffer.
class Node {
public:
  std::vector<long> shape;  // rank 1 or 2, all dims positive
  ArrayXd data;             // flat, row-major
  ArrayXd grad;             // empty until first accumulation
  bool requires_grad = false;
  std::vector<Tensor> parents;
  BackwardFn backward_fn;

  long size() const { return static_cast<long>(data.size()); }
  long rank() const { return static_cast<long>(shape.size()); }
  long rows() const { return rank() == 2 ? shape[0] : 1; }
  long cols() const { return shape.empty() ? 0 : shape.back(); }
  bool is_leaf() const { return parents.empty(); }

  ArrayXd& ensure_grad() {
    if (grad.size() != data.size()) grad = ArrayXd::Zero(data.size());
    return grad;
  }

  Eigen::Map<MatrixRM> mat() {
    return Eigen::Map<MatrixRM>(data.data(), rows(), cols());
  }
  Eigen::Map<const MatrixRM> mat() const {
    return Eigen::Map<const MatrixRM>(data.data(), rows(), cols());
  }
};

// --- construction -----------------------------------------------------------

Tensor make_tensor(std::vector<long> shape, ArrayXd data,
                   bool requires_grad = false);
Tensor from_matrix(const MatrixRM& m, bool requires_grad = false);
Tensor from_vector(const ArrayXd& v, bool requires_grad = false);
Tensor from_list(std::initializer_list<double> v, bool requires_grad = false);
Tensor zeros(std::vector<long> shape, bool requires_grad = false);

// Disables tape recording in scope (inference paths skip graph bookkeeping).
class NoGradGuard {
public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
  bool previous_;
};

// --- operations (each records its backward on the tape) ----------------------

Tensor matmul(const Tensor& a, const Tensor& b);
// Elementwise same-shape add/sub; `b` may also be rank-1 of length a.cols(),
// broadcast across rows (bias add).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise, same shape
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double c);
Tensor transpose(const Tensor& a);                       // rank-2
Tensor slice_rows(const Tensor& a, long r0, long r1);    // [r0, r1)
Tensor slice_cols(const Tensor& a, long c0, long c1);    // [c0, c1)
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);
// Softmax over the last axis. Masked entries get probability exactly 0; a row
// with no live entries raises DegenerateRowError. The mask, when present,
// must have one flag per element of `scores`.
Tensor masked_softmax(const Tensor& scores, const MaskArray& mask);
Tensor masked_softmax(const Tensor& scores);  // all-live rows
Tensor sum(const Tensor& a);                  // -> scalar (shape {1})

// --- backward ----------------------------------------------------------------

// Fills/accumulates dLoss/dLeaf on every reachable leaf with requires_grad.
// Repeated calls accumulate into parameter grads.
void backward(const Tensor& loss);
// Same walk, but leaf gradients accumulate into `sink` keyed by node address;
// shared parameter nodes are left untouched.
void backward(const Tensor& loss, std::unordered_map<Node*, ArrayXd>& sink);

void zero_grad(const std::vector<Tensor>& params);

// Max over all coordinates of |analytic - central_difference| /
// max(|analytic|, |cd|, 1e-8), where `f` rebuilds the scalar loss from the
// current parameter values. eps must lie in (0, 1e-2].
double grad_check(const std::function<Tensor()>& f,
                  const std::vector<Tensor>& params, double eps = 1e-5);

}  // namespace synthlab::tensor
