#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qpush/fredholm.hpp"
#include "qpush/qfunctions.hpp"
#include "qpush/simulate.hpp"

using namespace qpush;
using cplx = std::complex<double>;

namespace {

KernelSpec base_spec() {
  KernelSpec spec;
  spec.params = Params::make(0.5, 1.0, 1.0, {1.0});
  spec.n = 1;
  spec.t = 0.5;
  spec.zeta = {-0.3, 0.0};
  return spec;
}

}  // namespace

TEST_CASE("kernel degenerate cases and validation") {
  KernelSpec spec = base_spec();
  spec.zeta = {0.0, 0.0};
  CHECK(kernel_eval(spec, {1.05, 0.0}, {0.95, 0.0}) == cplx{0.0, 0.0});
  CHECK(fredholm_det(spec) == cplx{1.0, 0.0});

  spec.zeta = {0.4, 0.0};  // on the positive real axis
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = base_spec();
  spec.c1_radius = 0.9;  // violates sqrt(q)(1+r) < 1-r
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("kernel is stable under quadrature refinement") {
  const KernelSpec spec = base_spec();
  const double r = spec.radius();
  const cplx w = 1.0 + r, wp = 1.0 - r;
  const cplx k0 = kernel_eval(spec, w, wp);

  KernelSpec finer = spec;
  finer.mb_points = 2 * spec.mb_points;
  CHECK(std::abs(kernel_eval(finer, w, wp) - k0) < 1e-10);

  KernelSpec longer = spec;
  longer.mb_truncation = 2.0 * spec.truncation();
  longer.mb_points = 2 * spec.mb_points;  // keep the node spacing
  CHECK(std::abs(kernel_eval(longer, w, wp) - k0) < 1e-12);
}

TEST_CASE("determinant at t = 0 reduces to the q-Pochhammer") {
  for (double q : {0.5, 0.7})
    for (cplx zeta : {cplx{-0.3, 0.0}, cplx{0.0, 0.5}, cplx{-0.5, 0.5}}) {
      KernelSpec spec;
      spec.params = Params::make(q, 1.0, 1.0, {1.0});
      spec.n = 1;
      spec.t = 0.0;
      spec.zeta = zeta;
      const cplx det = fredholm_det(spec);
      const cplx want = 1.0 / qpoch_inf(zeta, q);
      CHECK(std::abs(det - want) < 1e-6);
    }
}

TEST_CASE("determinant matches the Skellam-sum transform at the reference point") {
  const KernelSpec spec = base_spec();
  const cplx det = fredholm_det(spec);
  const cplx lhs = qlaplace_exact_n1(spec.params, spec.t, spec.zeta);
  CHECK(std::abs(det - lhs) < 1e-4);
}

TEST_CASE("determinant is stable under Nystrom refinement") {
  const KernelSpec spec = base_spec();
  KernelSpec fine = spec;
  fine.nystrom_points = 128;
  CHECK(std::abs(fredholm_det(fine) - fredholm_det(spec)) < 1e-8);
}

TEST_CASE("determinant varies continuously along a path avoiding (0, inf)") {
  cplx prev{0.0, 0.0};
  bool first = true;
  for (int step = 0; step <= 8; ++step) {
    // quarter arc from -0.5 to 0.5 i
    const double th = M_PI * (1.0 - 0.5 * step / 8.0);
    KernelSpec spec = base_spec();
    spec.zeta = 0.5 * cplx{std::cos(th), std::sin(th)};
    const cplx det = fredholm_det(spec);
    CHECK(std::isfinite(det.real()));
    CHECK(std::isfinite(det.imag()));
    if (!first) CHECK(std::abs(det - prev) < 0.1);
    prev = det;
    first = false;
  }
}

TEST_CASE("exact single-particle transform") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0});
  CHECK(qlaplace_exact_n1(p, 0.7, {0.0, 0.0}) == cplx{1.0, 0.0});

  const cplx zeta{-0.6, 0.2};
  const cplx at0 = qlaplace_exact_n1(p, 0.0, zeta);
  CHECK(std::abs(at0 - 1.0 / qpoch_inf(zeta, p.q)) < 1e-12);

  // cross-check against brute Monte Carlo
  McOptions opt;
  opt.nsamples = 200000;
  opt.seed = 2718;
  const auto mc = mc_qlaplace(p, 1, 0.5, {-0.4, 0.0}, opt);
  const cplx exact = qlaplace_exact_n1(p, 0.5, {-0.4, 0.0});
  CHECK(std::abs(mc.mean - exact) <= 4.0 * mc.stderr_);
}

TEST_CASE("moment series rows") {
  const Params pL = Params::make(0.5, 1.0, 1.0, {1.0});
  const auto rows = divergence_demo(pL, 1.0, 8, 0.4);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0].term == 1.0);
  CHECK(rows[8].term > rows[7].term);
  CHECK(rows[8].term / rows[7].term > rows[2].term / rows[1].term);

  const Params p0 = Params::make(0.5, 1.0, 0.0, {1.0});
  const auto rows0 = divergence_demo(p0, 1.0, 8, 0.5);
  for (int k = 2; k <= 8; ++k)
    CHECK(rows0[static_cast<std::size_t>(k)].term <
          rows0[static_cast<std::size_t>(k - 1)].term);
}
