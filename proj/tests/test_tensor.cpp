#include "doctest.h"

#include <cmath>
#include <vector>

#include "synthlab/rng.hpp"
#include "synthlab/tensor.hpp"

using namespace synthlab;
using namespace synthlab::tensor;

namespace {

Tensor random_tensor(std::vector<long> shape, rng::Engine& e,
                     bool requires_grad = false) {
  long n = 1;
  for (long d : shape) n *= d;
  ArrayXd data(n);
  for (long i = 0; i < n; ++i) data[i] = e.uniform(-1.0, 1.0);
  return make_tensor(std::move(shape), std::move(data), requires_grad);
}

}  // namespace

TEST_CASE("matmul identity and hand arithmetic") {
  auto I = make_tensor({2, 2}, (ArrayXd(4) << 1, 0, 0, 1).finished());
  auto B = make_tensor({2, 2}, (ArrayXd(4) << 3, 4, 5, 6).finished());
  auto C = matmul(I, B);
  CHECK(C->shape == std::vector<long>{2, 2});
  for (int i = 0; i < 4; ++i) CHECK(C->data[i] == B->data[i]);

  auto row = make_tensor({1, 2}, (ArrayXd(2) << 1, 2).finished());
  auto col = make_tensor({2, 1}, (ArrayXd(2) << 3, 4).finished());
  CHECK(matmul(row, col)->data[0] == 11.0);

  CHECK_THROWS_AS(matmul(row, row), ShapeError);
}

TEST_CASE("matmul backward matches central finite differences") {
  rng::Engine e(11);
  auto a = random_tensor({3, 4}, e, true);
  auto b = random_tensor({4, 2}, e, true);
  auto w = random_tensor({3, 2}, e);  // constant weighting for a non-uniform seed
  double err = grad_check([&] { return sum(mul(matmul(a, b), w)); }, {a, b});
  CHECK(err < 1e-6);
}

TEST_CASE("layer_norm trivial cases") {
  auto g = from_list({1, 1, 1});
  auto b = from_list({0, 0, 0});
  auto y = layer_norm(from_list({1, 1, 1}), g, b, 1e-5);
  for (int i = 0; i < 3; ++i) CHECK(y->data[i] == 0.0);

  auto g2 = from_list({1, 1});
  auto b2 = from_list({0, 0});
  auto y2 = layer_norm(from_list({0, 2}), g2, b2, 1e-12);
  CHECK(y2->data[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(y2->data[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("layer_norm backward matches finite differences") {
  rng::Engine e(12);
  auto x = random_tensor({4, 6}, e, true);
  auto g = random_tensor({6}, e, true);
  auto b = random_tensor({6}, e, true);
  auto w = random_tensor({4, 6}, e);
  double err =
      grad_check([&] { return sum(mul(layer_norm(x, g, b, 1e-5), w)); }, {x, g, b});
  CHECK(err < 1e-5);
}

TEST_CASE("masked_softmax values") {
  auto p = masked_softmax(from_list({0, 0}),
                          (MaskArray(2) << true, true).finished());
  CHECK(p->data[0] == 0.5);
  CHECK(p->data[1] == 0.5);

  auto q = masked_softmax(from_list({5, -100}),
                          (MaskArray(2) << true, false).finished());
  CHECK(q->data[0] == 1.0);
  CHECK(q->data[1] == 0.0);

  // brute-force exp-normalize oracle
  auto r = masked_softmax(from_list({1, 2, 3}));
  double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (int i = 0; i < 3; ++i)
    CHECK(r->data[i] == doctest::Approx(std::exp(1.0 + i) / z).epsilon(1e-12));

  CHECK_THROWS_AS(
      masked_softmax(from_list({1, 2}),
                     (MaskArray(2) << false, false).finished()),
      DegenerateRowError);
}

TEST_CASE("masked_softmax row properties on random input") {
  rng::Engine e(13);
  auto scores = random_tensor({8, 16}, e);
  MaskArray mask(8 * 16);
  for (long i = 0; i < mask.size(); ++i) mask[i] = e.uniform() < 0.6;
  for (long r = 0; r < 8; ++r) mask[r * 16] = true;  // keep every row alive
  auto p = masked_softmax(scores, mask);
  for (long r = 0; r < 8; ++r) {
    double s = 0;
    for (long c = 0; c < 16; ++c) {
      double v = p->data[r * 16 + c];
      CHECK(v >= 0.0);
      if (!mask[r * 16 + c]) CHECK(v == 0.0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("masked_softmax backward matches finite differences") {
  rng::Engine e(14);
  auto s = random_tensor({3, 5}, e, true);
  auto w = random_tensor({3, 5}, e);
  MaskArray mask = MaskArray::Constant(15, true);
  mask[2] = mask[7] = mask[11] = false;
  double err =
      grad_check([&] { return sum(mul(masked_softmax(s, mask), w)); }, {s});
  CHECK(err < 1e-6);
}

TEST_CASE("leaky_relu definition") {
  auto y = leaky_relu(from_list({2, -1, 0}), 0.01);
  CHECK(y->data[0] == 2.0);
  CHECK(y->data[1] == -0.01);
  CHECK(y->data[2] == 0.0);
  CHECK_THROWS_AS(leaky_relu(from_list({1}), 0.0), ArgumentError);

  rng::Engine e(15);
  auto x = random_tensor({20}, e, true);
  auto w = random_tensor({20}, e);
  double err = grad_check([&] { return sum(mul(leaky_relu(x, 0.01), w)); }, {x});
  CHECK(err < 1e-6);
}

TEST_CASE("elementwise, slicing and concatenation gradients") {
  rng::Engine e(16);
  auto a = random_tensor({4, 5}, e, true);
  auto b = random_tensor({4, 5}, e, true);
  auto bias = random_tensor({5}, e, true);
  auto w = random_tensor({4, 5}, e);

  CHECK(grad_check([&] { return sum(mul(add(a, b), w)); }, {a, b}) < 1e-6);
  CHECK(grad_check([&] { return sum(mul(sub(a, b), w)); }, {a, b}) < 1e-6);
  CHECK(grad_check([&] { return sum(mul(mul(a, b), w)); }, {a, b}) < 1e-6);
  CHECK(grad_check([&] { return sum(mul(add(a, bias), w)); }, {a, bias}) < 1e-6);
  CHECK(grad_check([&] { return sum(mul(sub(a, bias), w)); }, {a, bias}) < 1e-6);
  CHECK(grad_check([&] { return sum(mul(scale(a, -2.5), w)); }, {a}) < 1e-6);
  CHECK(grad_check([&] { return sum(mul(add_scalar(a, 3.0), w)); }, {a}) < 1e-6);

  auto wt = random_tensor({5, 4}, e);
  CHECK(grad_check([&] { return sum(mul(transpose(a), wt)); }, {a}) < 1e-6);

  auto w2 = random_tensor({2, 3}, e);
  CHECK(grad_check([&] { return sum(mul(slice_rows(slice_cols(a, 1, 4), 2, 4), w2)); },
                   {a}) < 1e-6);

  auto w8 = random_tensor({8, 5}, e);
  CHECK(grad_check([&] { return sum(mul(concat_rows({a, b}), w8)); }, {a, b}) < 1e-6);
  auto w10 = random_tensor({4, 10}, e);
  CHECK(grad_check([&] { return sum(mul(concat_cols({a, b}), w10)); }, {a, b}) < 1e-6);
}

TEST_CASE("broadcast add matches explicit row replication") {
  auto a = make_tensor({2, 3}, (ArrayXd(6) << 1, 2, 3, 4, 5, 6).finished());
  auto bias = from_list({10, 20, 30});
  auto y = add(a, bias);
  ArrayXd want(6);
  want << 11, 22, 33, 14, 25, 36;
  for (int i = 0; i < 6; ++i) CHECK(y->data[i] == want[i]);
}

TEST_CASE("backward fills linear-map gradients and accumulates") {
  auto x = make_tensor({3}, (ArrayXd(3) << 1, 2, 3).finished(), true);
  auto loss = sum(x);
  backward(loss);
  for (int i = 0; i < 3; ++i) CHECK(x->grad[i] == 1.0);
  backward(loss);  // repeated call accumulates
  for (int i = 0; i < 3; ++i) CHECK(x->grad[i] == 2.0);

  CHECK_THROWS_AS(backward(x), ShapeError);  // non-scalar loss
}

TEST_CASE("regression-style loss gradients match finite differences") {
  rng::Engine e(17);
  auto x = random_tensor({1, 4}, e);
  auto w = random_tensor({4, 1}, e, true);
  auto y = random_tensor({1, 1}, e);
  auto f = [&] {
    auto d = sub(matmul(x, w), y);
    return sum(mul(d, d));
  };
  CHECK(grad_check(f, {w}) < 1e-6);
}

TEST_CASE("disconnected parameter keeps a zero gradient") {
  auto used = make_tensor({2}, (ArrayXd(2) << 1, 2).finished(), true);
  auto unused = make_tensor({2}, (ArrayXd(2) << 3, 4).finished(), true);
  backward(sum(used));
  CHECK(unused->grad.size() == 2);
  CHECK(unused->grad[0] == 0.0);
  CHECK(unused->grad[1] == 0.0);
}

TEST_CASE("grad_check basics and negative control") {
  auto w = make_tensor({1}, (ArrayXd(1) << 3.0).finished(), true);
  CHECK(grad_check([&] { return sum(mul(w, w)); }, {w}) < 1e-9);

  // corrupted gradient: analytic path treats one factor as constant
  auto detect = grad_check(
      [&] {
        auto frozen = from_vector(w->data);  // constant copy, no grad path
        return sum(mul(w, frozen));
      },
      {w});
  CHECK(detect > 1e-2);

  CHECK_THROWS_AS(grad_check([&] { return sum(w); }, {w}, 0.0), ArgumentError);
  CHECK_THROWS_AS(grad_check([&] { return sum(w); }, {w}, 0.5), ArgumentError);
}

TEST_CASE("forward ops reject non-finite results") {
  auto big = make_tensor({1}, (ArrayXd(1) << 1e308).finished());
  CHECK_THROWS_AS(mul(big, big), NumericError);
  CHECK_THROWS_AS(scale(big, 1e10), NumericError);
}

TEST_CASE("NoGradGuard suppresses tape recording") {
  auto w = make_tensor({2}, (ArrayXd(2) << 1, 2).finished(), true);
  NoGradGuard guard;
  auto y = scale(w, 2.0);
  CHECK_FALSE(y->requires_grad);
  CHECK(y->parents.empty());
}

TEST_CASE("leaf sink redirects parameter gradients") {
  auto w = make_tensor({2}, (ArrayXd(2) << 1, 2).finished(), true);
  auto loss = sum(mul(w, w));
  std::unordered_map<Node*, ArrayXd> sink;
  backward(loss, sink);
  CHECK(w->grad[0] == 0.0);  // parameter untouched
  CHECK(w->grad[1] == 0.0);
  REQUIRE(sink.count(w.get()) == 1);
  CHECK(sink[w.get()][0] == doctest::Approx(2.0));
  CHECK(sink[w.get()][1] == doctest::Approx(4.0));
}

TEST_CASE("attention-flavoured composite gradient check") {
  // single-head attention block at tiny width
  rng::Engine e(18);
  const long L = 5, d = 4;
  auto x = random_tensor({L, d}, e, true);
  auto wq = random_tensor({d, d}, e, true);
  auto wk = random_tensor({d, d}, e, true);
  auto wv = random_tensor({d, d}, e, true);
  auto w = random_tensor({L, d}, e);
  auto f = [&] {
    auto q = scale(matmul(x, wq), 1.0 / std::sqrt(static_cast<double>(d)));
    auto scores = matmul(q, transpose(matmul(x, wk)));
    auto ctxv = matmul(masked_softmax(scores), matmul(x, wv));
    return sum(mul(ctxv, w));
  };
  CHECK(grad_check(f, {x, wq, wk, wv}) < 1e-4);
}
