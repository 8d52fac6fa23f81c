#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "pfa/autodiff.hpp"

using namespace pfa;
using ad::Tape;
using ad::Var;

TEST_SUITE("autodiff") {

TEST_CASE("recorded values match direct evaluation") {
  Tape t;
  const Var x = t.input(3.0);
  CHECK((x * x).value() == 9.0);
  const Var z = t.input(0.0);
  CHECK(t.sigmoid(z).value() == 0.5);
  CHECK(testing::error_kind_of([&] { t.log(z); }) == ErrorKind::domain);
  CHECK(testing::error_kind_of([&] { t.log(t.input(-1.0)); }) == ErrorKind::domain);
  CHECK(testing::error_kind_of([&] { t.sqrt(t.input(-1.0)); }) == ErrorKind::domain);
  CHECK(testing::error_kind_of([&] { t.div(x, z); }) == ErrorKind::domain);
}

TEST_CASE("basic derivatives") {
  Tape t;
  const Var x = t.input(3.0);
  CHECK(t.backward(x * x).scalar(x) == 6.0);

  Tape s;
  const Var z = s.input(0.0);
  CHECK(s.backward(s.sigmoid(z)).scalar(z) == 0.25);

  Tape u;
  const Var a = u.input(1.5);
  const Var b = u.input(2.0);
  const Var y = u.tanh(b) * 4.0;
  CHECK(u.backward(y).scalar(a) == 0.0);
}

TEST_CASE("inputs recorded after the output get zero gradient") {
  Tape t;
  const Var x = t.input(2.0);
  const Var y = t.exp(x);
  const Var late = t.input(5.0);
  const auto g = t.backward(y);
  CHECK(g.scalar(late) == 0.0);
  CHECK(g.scalar(x) == doctest::Approx(std::exp(2.0)).epsilon(1e-15));
}

TEST_CASE("finite-difference checker") {
  auto sq = [](Tape&, Var x) { return x * x; };
  const double p3[] = {3.0};
  CHECK(ad::finite_difference_check(sq, p3, 1e-5).max_relative_error < 1e-8);

  auto th = [](Tape& t, Var x) { return t.tanh(x); };
  const double p7[] = {0.7};
  CHECK(ad::finite_difference_check(th, p7, 1e-5).max_relative_error < 1e-7);

  auto constant = [](Tape& t, Var) { return t.constant(4.0); };
  const auto r = ad::finite_difference_check(constant, p7, 1e-5);
  CHECK(r.analytic[0] == 0.0);
  CHECK(r.numeric[0] == 0.0);
  CHECK(r.max_relative_error == 0.0);
}

TEST_CASE("elementwise ops broadcast scalars") {
  Tape t;
  const double v[] = {1.0, 2.0, 3.0};
  const Var x = t.input(v);
  const Var k = t.input(2.0);
  const Var y = x * k;
  REQUIRE(y.size() == 3);
  CHECK(y[2] == 6.0);
  const auto g = t.backward(t.sum(y));
  CHECK(g.scalar(k) == 6.0);
  CHECK(g.wrt(x)[1] == 2.0);
  const double w[] = {1.0, 2.0};
  CHECK(testing::error_kind_of([&] { t.add(x, t.input(w)); }) == ErrorKind::invalid_argument);
}

TEST_CASE("max ties and indicators pass no gradient") {
  Tape t;
  const Var a = t.input(1.0);
  const Var b = t.input(1.0);
  const auto g = t.backward(t.max(a, b));
  CHECK(g.scalar(a) == 0.0);
  CHECK(g.scalar(b) == 0.0);

  Tape s;
  const Var x = s.input(2.0);
  const Var y = s.input(1.0);
  const Var ind = s.indicator_ge(x, y);
  CHECK(ind.value() == 1.0);
  const auto h = s.backward(ind * x);
  CHECK(h.scalar(x) == 1.0);  // through the product only
  CHECK(h.scalar(y) == 0.0);
}

TEST_CASE("slices, concat and reductions") {
  Tape t;
  const double v[] = {0.5, -2.0, 4.0, 1.0};
  const Var x = t.input(v);
  const Var s = t.slice(x, 1, 2);
  CHECK(s.size() == 2);
  CHECK(s[0] == -2.0);
  const Var c = t.concat(s, x);
  CHECK(c.size() == 6);
  const Var hi = t.max_reduce(x);
  const Var lo = t.min_reduce(x);
  CHECK(hi.value() == 4.0);
  CHECK(lo.value() == -2.0);
  const auto g = t.backward(hi - lo + t.sum(c));
  // d/dx0 = 1 (sum over x), d/dx1 = -1 + 1 + 1, d/dx2 = 1 + 1 + 1, d/dx3 = 1
  CHECK(g.wrt(x)[0] == 1.0);
  CHECK(g.wrt(x)[1] == 1.0);
  CHECK(g.wrt(x)[2] == 3.0);
  CHECK(g.wrt(x)[3] == 1.0);
  CHECK(testing::error_kind_of([&] { t.slice(x, 3, 2); }) == ErrorKind::invalid_argument);
}

TEST_CASE("matvec against recorded and external matrices") {
  const double w[] = {1.0, 3.0, 2.0, 4.0};  // column-major [[1,2],[3,4]]
  Tape t;
  const double v[] = {1.0, -1.0};
  const Var x = t.input(v);
  const Var y = t.matvec_const(w, 2, 2, x);
  CHECK(y[0] == -1.0);
  CHECK(y[1] == -1.0);
  const Var wm = t.input(w);
  const Var z = t.matvec(wm, 2, x);
  CHECK(z[0] == y[0]);
  const auto g = t.backward(t.sum(z));
  CHECK(g.wrt(x)[0] == 4.0);
  CHECK(g.wrt(x)[1] == 6.0);
  CHECK(g.wrt(wm)[0] == 1.0);
  CHECK(g.wrt(wm)[2] == -1.0);
}

TEST_CASE("composite expressions match central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  static const double w[] = {0.3, -0.2, 0.5, 0.1, -0.4, 0.7};  // 2 x 3
  auto f = [](Tape& t, Var x) {
    const Var a = t.tanh(t.matvec_const(w, 2, 3, x));
    const Var b = t.sigmoid(t.slice(x, 1, 2)) * t.exp(a);
    const Var c = t.log(t.square(x) + 1.0) / t.sqrt(x + 0.5);
    return t.sum(b) + t.max_reduce(c) - t.min_reduce(t.concat(a, x)) + t.element(x, 0);
  };
  for (int trial = 0; trial < 50; ++trial) {
    const double p[] = {u(rng), u(rng), u(rng)};
    const auto r = ad::finite_difference_check(f, p, 1e-6, 1e-8);
    CHECK(r.max_relative_error < 1e-6);
  }
}

TEST_CASE("clear keeps the tape usable") {
  Tape t;
  const Var x = t.input(2.0);
  (void)(x * x);
  CHECK(t.node_count() == 2);
  t.clear();
  CHECK(t.node_count() == 0);
  const Var y = t.input(5.0);
  CHECK(t.backward(y * 3.0).scalar(y) == 3.0);
}

TEST_CASE("non-finite values are reported") {
  Tape t;
  const Var x = t.input(1000.0);
  CHECK(testing::error_kind_of([&] { t.exp(x); }) == ErrorKind::numeric);
}

}  // TEST_SUITE
