#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qpush/qfunctions.hpp"
#include "qpush/rng.hpp"
#include "qpush/stats.hpp"

using namespace qpush;

TEST_CASE("finite q-Pochhammer basics") {
  CHECK(qpoch_finite(0.7, 0.5, 0) == 1.0);  // empty product
  CHECK(qpoch_finite(0.5, 0.5, 1) == doctest::Approx(0.5).epsilon(1e-15));  // (q;q)_1
  CHECK(qq_factorial(0.5, 1) == doctest::Approx(0.5));
  // (a;q)_2 = (1-a)(1-aq)
  CHECK(qpoch_finite(0.3, 0.4, 2) == doctest::Approx(0.7 * (1.0 - 0.12)).epsilon(1e-15));
}

TEST_CASE("infinite q-Pochhammer") {
  CHECK(qpoch_inf(0.0, 0.5) == 1.0);
  // truncation stability: doubling the depth moves the value by less than tol
  const double a = 0.8, q = 0.6, tol = 1e-12;
  const int m = static_cast<int>(std::ceil(std::log(tol / a) / std::log(q)));
  const double v1 = qpoch_finite(a, q, m);
  const double v2 = qpoch_finite(a, q, 2 * m);
  CHECK(std::abs(v1 - v2) < tol);
  // complex argument agrees with the real overload on the real axis
  const std::complex<double> vc = qpoch_inf(std::complex<double>(0.3, 0.0), 0.5);
  CHECK(vc.real() == doctest::Approx(qpoch_inf(0.3, 0.5)).epsilon(1e-14));
  CHECK(vc.imag() == 0.0);
}

TEST_CASE("qpoch_ratio equals the quotient of truncated products") {
  const double q = 0.55;
  const std::complex<double> n{0.4, 0.2}, d{0.1, -0.3};
  const std::complex<double> r = qpoch_ratio(n, d, q);
  const std::complex<double> ref = qpoch_inf(n, q, 1e-17) / qpoch_inf(d, q, 1e-17);
  CHECK(std::abs(r - ref) < 1e-13);
}

TEST_CASE("integer powers of q and the infinite-gap sentinel") {
  CHECK(qpow(0.5, 3) == doctest::Approx(0.125));
  CHECK(qpow(0.5, -2) == doctest::Approx(4.0));
  CHECK(qpow_gap(0.5, kInfiniteGap) == 0.0);
  CHECK(qpow_gap(0.5, 0) == 1.0);
}

TEST_CASE("binomial") {
  CHECK(binomial(5, 2) == doctest::Approx(10.0));
  CHECK(binomial(7, 0) == 1.0);
  CHECK(binomial(3, 5) == 0.0);
}

TEST_CASE("regularized incomplete gamma against erfc") {
  // Q(1/2, x) = erfc(sqrt(x))
  for (double x : {0.1, 0.5, 1.0, 3.0, 8.0})
    CHECK(gammq(0.5, x) == doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-10));
  CHECK(chi_square_pvalue(0.0, 4) == doctest::Approx(1.0));
  CHECK(chi_square_pvalue(100.0, 4) < 1e-10);
}

TEST_CASE("Welford merge equals bulk accumulation") {
  auto rng = make_stream(7, 0);
  std::uniform_real_distribution<double> u(-2.0, 5.0);
  Welford all, w1, w2;
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    all.add(x);
    (i % 3 == 0 ? w1 : w2).add(x);
  }
  w1.merge(w2);
  CHECK(w1.n == all.n);
  CHECK(w1.mean == doctest::Approx(all.mean).epsilon(1e-13));
  CHECK(w1.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

TEST_CASE("deterministic counter-based streams") {
  auto a = make_stream(42, 7);
  auto b = make_stream(42, 7);
  auto c = make_stream(42, 8);
  CHECK(a() == b());
  CHECK(a() != c());
}
