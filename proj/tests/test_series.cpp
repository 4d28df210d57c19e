#include <catch2/catch_amalgamated.hpp>

#include "polya/series.hpp"
#include "test_helpers.hpp"

using namespace polya;
using testutil::Rng;
using testutil::random_series;

namespace {

Series geometric_prefix(const Rat& r, int order) {
  Series s(order);
  Rat p = 1;
  for (int n = 1; n <= order; ++n) {
    p *= r;
    s.set(n, p);
  }
  return s;
}

}  // namespace

TEST_CASE("add: coefficientwise with min-order truncation") {
  Series z = monomial(1, 1, 8);
  Series two_z = add(z, z);
  CHECK(two_z.at(1) == 2);
  CHECK(two_z.at(2) == 0);

  Series a = Series::from_coeffs({1, 1}, 8);         // z + z^2
  Series b = monomial(3, 1, 8);                      // z^3
  Series s = add(a, b);
  CHECK(s == Series::from_coeffs({1, 1, 1}, 8));

  // identity case
  CHECK(add(a, zero_series(8)) == a);

  // orders may differ; result order is the min
  Series c = monomial(1, 1, 4);
  CHECK(add(a, c).order() == 4);
}

TEST_CASE("mul: Cauchy product") {
  Series z = monomial(1, 1, 8);
  CHECK(mul(z, z) == monomial(2, 1, 8));

  Series a = Series::from_coeffs({1, 1}, 8);  // z + z^2
  CHECK(mul(a, a) == Series::from_coeffs({0, 1, 2, 1}, 8));
}

TEST_CASE("mul: Catalan convolution identity (ballot-recurrence oracle)") {
  const int N = 40;
  auto cat = testutil::catalan_oracle(N);
  Series c(N);
  for (int n = 1; n <= N; ++n) c.set(n, cat[static_cast<size_t>(n)]);
  // C = z + C^2, so [z^n] C^2 must equal c(n) for n >= 2.
  Series csq = mul(c, c);
  CHECK(csq.at(1) == 0);
  for (int n = 2; n <= N; ++n) CHECK(csq.at(n) == c.at(n));
}

TEST_CASE("scale") {
  Series a = Series::from_coeffs({1, 1}, 8);
  CHECK(scale(3, a) == Series::from_coeffs({3, 3}, 8));
  CHECK(scale(0, a).is_zero_series());
  CHECK(scale(rat(1, 2), monomial(1, 2, 8)) == monomial(1, 1, 8));
  CHECK_THROWS_AS(scale(rat(-1), a), Error);
}

TEST_CASE("compose") {
  Series a = Series::from_coeffs({1, 1}, 8);  // z + z^2
  Series wsq = monomial(2, 1, 8);             // composing w^2
  CHECK(compose(wsq, a) == Series::from_coeffs({0, 1, 2, 1}, 8));

  Series z = monomial(1, 1, 8);
  CHECK(compose(a, z) == a);

  // Seq applied to z/(1-z) gives z/(1-2z): coefficients 2^{n-1}
  const int N = 16;
  Series geo = geometric_prefix(1, N);
  Series comp = compose(geo, geo);
  Rat expect = 1;
  for (int n = 1; n <= N; ++n) {
    CHECK(comp.at(n) == expect);
    expect *= 2;
  }
}

TEST_CASE("substitute_power") {
  Series a = Series::from_coeffs({1, 1}, 8);
  Series s = substitute_power(a, 2);
  CHECK(s == Series::from_coeffs({0, 1, 0, 1}, 8));
  CHECK(substitute_power(a, 1) == a);
  CHECK(s.order() == a.order());
}

TEST_CASE("derivative returns a raw coefficient sequence") {
  Series zsq = monomial(2, 1, 8);
  auto d = derivative(zsq);
  CHECK(d[0] == 0);
  CHECK(d[1] == 2);

  Series z = monomial(1, 1, 8);
  auto dz = derivative(z);
  CHECK(dz[0] == 1);  // nonzero constant term is the point of the raw format

  Series geo = geometric_prefix(1, 12);
  auto dg = derivative(geo);
  for (size_t m = 0; m < dg.size(); ++m) CHECK(dg[m] == Rat(static_cast<long>(m) + 1));
}

TEST_CASE("eval_real basics") {
  Series z = monomial(1, 1, 8);
  auto r = eval_real(z, 0.5);
  CHECK(r.value == Catch::Approx(0.5));
  CHECK(r.tail_bound == 0.0);  // polynomial tail

  const int N = 64;
  Series geo = geometric_prefix(1, N);
  auto g = eval_real(geo, 0.5);
  CHECK(g.value == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(g.tail_bound < 1e-18);
  CHECK(g.tail_bound > 0.0);

  CHECK_THROWS_AS(eval_real(z, -0.1), Error);
}

TEST_CASE("eval_real: true error within reported tail bound on closed forms") {
  const int N = 48;
  for (double ratio : {1.0, 2.0}) {
    Series geo = geometric_prefix(rat(static_cast<long>(ratio)), N);
    for (double x : {0.1, 0.2, 0.3}) {
      if (ratio * x >= 1.0) continue;
      auto r = eval_real(geo, x);
      double truth = ratio * x / (1.0 - ratio * x);
      CHECK(std::fabs(truth - r.value) <= r.tail_bound + 1e-14);
    }
  }
  // polynomial: exact, zero tail
  Series p = Series::from_coeffs({1, 0, 2}, 16);
  auto r = eval_real(p, 0.7);
  CHECK(r.tail_bound == 0.0);
  CHECK(r.value == Catch::Approx(0.7 + 2 * 0.7 * 0.7 * 0.7));
}

TEST_CASE("algebra laws on random series (exact)") {
  Rng rng(12345);
  for (int trial = 0; trial < 30; ++trial) {
    int order = rng.range(4, 16);
    Series a = random_series(rng, order);
    Series b = random_series(rng, order);
    Series c = random_series(rng, order);

    CHECK(add(a, b) == add(b, a));
    CHECK(mul(a, b) == mul(b, a));
    CHECK(add(add(a, b), c) == add(a, add(b, c)));
    CHECK(mul(mul(a, b), c) == mul(a, mul(b, c)));
    CHECK(mul(a, add(b, c)) == add(mul(a, b), mul(a, c)));
  }
}

TEST_CASE("composition associativity up to order 32") {
  Rng rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    int order = rng.range(6, 32);
    Series a = random_series(rng, order, 3, 2);
    Series b = random_series(rng, order, 3, 2);
    Series c = random_series(rng, order, 3, 2);
    CHECK(compose(a, compose(b, c)) == compose(compose(a, b), c));
  }
}

TEST_CASE("dominance preserved by the arithmetical operations") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    int order = rng.range(4, 12);
    Series a = random_series(rng, order);
    Series c = random_series(rng, order);
    // b dominates a by construction
    Series b = a;
    for (int n = 1; n <= order; ++n) b.set(n, a.at(n) + rat(rng.range(0, 2)));

    REQUIRE(dominates(a, b));
    CHECK(dominates(add(a, c), add(b, c)));
    CHECK(dominates(mul(a, c), mul(b, c)));
    CHECK(dominates(compose(a, c), compose(b, c)));
    CHECK(dominates(compose(c, a), compose(c, b)));
  }
}

TEST_CASE("substitute_power composes multiplicatively") {
  Rng rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    int order = rng.range(6, 24);
    Series a = random_series(rng, order);
    int j = rng.range(1, 3), k = rng.range(1, 3);
    CHECK(substitute_power(substitute_power(a, j), k) == substitute_power(a, j * k));
  }
}

TEST_CASE("DOM discipline: negative coefficients are a hard error") {
  Series a(4);
  CHECK_THROWS_AS(a.set(1, rat(-1)), Error);
  CHECK_THROWS_AS(a.set(0, rat(1)), Error);  // constant term is locked at zero
}

TEST_CASE("IntSeries checks integrality") {
  Series a = Series::from_coeffs({1, 2, 3}, 4);
  CHECK_NOTHROW(IntSeries(a));
  Series b = Series::from_coeffs({rat(1, 2)}, 4);
  CHECK_THROWS_AS(IntSeries(b), Error);
  CHECK(is_integral_series(a));
  CHECK(!is_integral_series(b));
}
