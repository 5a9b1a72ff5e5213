#include "doctest.h"

#include <cmath>

#include "synthlab/optim.hpp"
#include "synthlab/tensor.hpp"

using namespace synthlab;
using namespace synthlab::tensor;

TEST_CASE("adam with lr=0 leaves parameters unchanged") {
  auto w = make_tensor({2}, (ArrayXd(2) << 1.5, -0.5).finished(), true);
  w->grad = (ArrayXd(2) << 1.0, -2.0).finished();
  AdamState st({w});
  adam_step({w}, st, 0.0);
  CHECK(w->data[0] == 1.5);
  CHECK(w->data[1] == -0.5);
  CHECK(st.step() == 1);
}

TEST_CASE("first adam step with unit gradient moves by about lr") {
  auto w = make_tensor({1}, (ArrayXd(1) << 0.0).finished(), true);
  w->grad = (ArrayXd(1) << 1.0).finished();
  AdamState st({w});
  adam_step({w}, st, 0.003);
  // bias correction makes m_hat = g and v_hat = g^2 at t=1
  CHECK(w->data[0] == doctest::Approx(-0.003).epsilon(1e-6));
}

TEST_CASE("two adam steps match the frozen reference trajectory") {
  // Reference computed independently (plain scalar arithmetic).
  auto w = make_tensor({2}, (ArrayXd(2) << 1.0, -2.0).finished(), true);
  AdamState st({w});
  w->grad = (ArrayXd(2) << 0.5, -1.5).finished();
  adam_step({w}, st, 0.01);
  CHECK(w->data[0] == doctest::Approx(0.9900000002).epsilon(1e-12));
  CHECK(w->data[1] == doctest::Approx(-1.9900000000666667).epsilon(1e-12));
  w->grad = (ArrayXd(2) << -0.25, 2.0).finished();
  adam_step({w}, st, 0.01);
  CHECK(w->data[0] == doctest::Approx(0.9873366298707846).epsilon(1e-12));
  CHECK(w->data[1] == doctest::Approx(-1.9919351041470859).epsilon(1e-12));
  CHECK(st.step() == 2);
}

TEST_CASE("adam converges on a quadratic bowl") {
  auto w = make_tensor({1}, (ArrayXd(1) << 0.0).finished(), true);
  AdamState st({w});
  for (int i = 0; i < 100; ++i) {
    zero_grad({w});
    auto d = add_scalar(w, -5.0);
    backward(sum(mul(d, d)));
    adam_step({w}, st, 0.2);
  }
  CHECK(std::abs(w->data[0] - 5.0) < 0.5);
}

TEST_CASE("adam rejects non-finite gradients") {
  auto w = make_tensor({1}, (ArrayXd(1) << 0.0).finished(), true);
  w->grad = (ArrayXd(1) << std::numeric_limits<double>::quiet_NaN()).finished();
  AdamState st({w});
  CHECK_THROWS_AS(adam_step({w}, st, 0.1), NumericError);
}

TEST_CASE("lr schedule ramps linearly then decays by cosine") {
  LrSchedule s{0.003, 5, 20};
  CHECK(lr_at(s, 0) == 0.0);
  CHECK(lr_at(s, 1) == doctest::Approx(0.0006).epsilon(1e-12));
  CHECK(lr_at(s, 2) == doctest::Approx(0.0012).epsilon(1e-12));
  CHECK(lr_at(s, 5) == doctest::Approx(0.003).epsilon(1e-12));
  CHECK(lr_at(s, 6) == doctest::Approx(0.0029672214011007086).epsilon(1e-12));
  CHECK(lr_at(s, 10) == doctest::Approx(0.00225).epsilon(1e-12));
  CHECK(lr_at(s, 13) == doctest::Approx(0.0013432073050985201).epsilon(1e-12));
  CHECK(lr_at(s, 20) == 0.0);
}

TEST_CASE("lr schedule is continuous at the ramp end and nonincreasing after") {
  LrSchedule s{1.0, 7, 50};
  double prev = lr_at(s, 7);
  CHECK(prev == doctest::Approx(1.0));
  for (long step = 8; step <= 50; ++step) {
    double v = lr_at(s, step);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("lr schedule rejects out-of-range steps") {
  LrSchedule s{1.0, 5, 20};
  CHECK_THROWS_AS(lr_at(s, -1), ArgumentError);
  CHECK_THROWS_AS(lr_at(s, 21), ArgumentError);
}
