#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qpush/evolve.hpp"
#include "qpush/rng.hpp"

using namespace qpush;

TEST_CASE("level-set basis order and triangularity, N=1 k=1") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0});
  const auto gen = build_dual_generator(p, 1);
  REQUIRE(gen.dim() == 2);
  CHECK(gen.basis[0].y == std::vector<std::int64_t>{1, 0});
  CHECK(gen.basis[1].y == std::vector<std::int64_t>{0, 1});
  CHECK(gen.lower_triangular());

  // d/dt h(t,(0,1)) = R a (1-q) h(t,(1,0)) + [-R a (1-q) + (L/a)(q^{-1}-1)] h(t,(0,1))
  const double q = p.q;
  CHECK(gen.at(1, 0) == doctest::Approx(p.R * (1.0 - q)));
  CHECK(gen.at(1, 1) == doctest::Approx(-p.R * (1.0 - q) + p.L * (1.0 / q - 1.0)));
  CHECK(gen.at(0, 0) == doctest::Approx(0.0));  // boundary slot only feeds itself
}

TEST_CASE("matrix action equals the dual operator pointwise") {
  const Params p = Params::make(0.45, 1.2, 0.7, {1.0, 1.3, 0.8});
  for (int k = 1; k <= 3; ++k) {
    const auto gen = build_dual_generator(p, k);
    CHECK(gen.lower_triangular());
    auto rng = make_stream(21, static_cast<std::uint64_t>(k));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> gvec(static_cast<std::size_t>(gen.dim()));
    for (auto& v : gvec) v = u(rng);
    auto gfun = [&](const OccupationState& y) {
      return gvec[static_cast<std::size_t>(gen.index_of(y))];
    };
    for (int row = 0; row < gen.dim(); ++row) {
      double via_matrix = 0.0;
      for (int col = 0; col < gen.dim(); ++col)
        via_matrix += gen.at(row, col) * gvec[static_cast<std::size_t>(col)];
      const double via_op =
          apply_generator_dual(p, gfun, gen.basis[static_cast<std::size_t>(row)]);
      CHECK(via_matrix == doctest::Approx(via_op).epsilon(1e-11));
    }
  }
}

TEST_CASE("dimension cap is enforced") {
  const Params p = Params::make(0.5, 1.0, 1.0, std::vector<double>(30, 1.0));
  CHECK_THROWS_AS(build_dual_generator(p, 10, 1000), std::invalid_argument);
}

TEST_CASE("initial data and the single-particle closed form") {
  const Params p = Params::make(0.5, 1.3, 0.6, {1.1});
  const auto x0 = ParticleConfig::step(1);

  auto sol0 = solve_true_evolution(p, x0, 1, 0.0);
  for (int i = 0; i < sol0.gen.dim(); ++i)
    CHECK(sol0.h[static_cast<std::size_t>(i)] ==
          doctest::Approx(observable_H(p.q, x0, sol0.gen.basis[static_cast<std::size_t>(i)])));

  const double t = 0.8;
  const auto sol = solve_true_evolution(p, x0, 1, t);
  OccupationState y;
  y.y = {0, 1};
  const double want =
      std::exp(t * (p.R * 1.1 * (p.q - 1.0) + p.L / 1.1 * (1.0 / p.q - 1.0)));
  CHECK(sol.value(y) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("boundary slots stay at zero along the flow") {
  const Params p = Params::make(0.4, 1.0, 1.0, {1.0, 0.9, 1.2});
  for (double t : {0.1, 0.7, 1.5}) {
    const auto sol = solve_true_evolution(p, ParticleConfig::step(3), 3, t);
    for (int i = 0; i < sol.gen.dim(); ++i)
      if (sol.gen.basis[static_cast<std::size_t>(i)].y[0] > 0)
        CHECK(std::abs(sol.h[static_cast<std::size_t>(i)]) < 1e-12);
  }
}

TEST_CASE("semigroup property") {
  const Params p = Params::make(0.55, 1.0, 0.8, {1.0, 1.2});
  const auto gen = build_dual_generator(p, 2);
  const auto h0 = initial_data(p, gen, ParticleConfig::step(2));
  const double t1 = 0.3, t2 = 0.45;
  const auto once = propagate(gen, h0, t1 + t2);
  const auto twice = propagate(gen, propagate(gen, h0, t1), t2);
  for (int i = 0; i < gen.dim(); ++i) {
    const double scale = std::max(1.0, std::abs(once[static_cast<std::size_t>(i)]));
    CHECK(std::abs(once[static_cast<std::size_t>(i)] - twice[static_cast<std::size_t>(i)]) /
              scale <
          1e-10);
  }
}

TEST_CASE("pure right-jump dynamics: nonpositive diagonal, decaying moments") {
  const Params p = Params::make(0.5, 1.4, 0.0, {1.0, 1.0, 1.0});
  const auto gen = build_dual_generator(p, 2);
  for (int i = 0; i < gen.dim(); ++i) CHECK(gen.at(i, i) <= 0.0);

  const MultiIndex n = {2, 1};
  double prev = exact_moment(p, n, 0.0);
  CHECK(prev == doctest::Approx(1.0));
  for (double t : {0.2, 0.5, 1.0, 2.0}) {
    const double cur = exact_moment(p, n, t);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("step initial data gives unit moments at t = 0") {
  const Params p = Params::make(0.35, 1.0, 1.0, {1.0, 1.1, 0.9, 1.2});
  for (const auto& n : weyl_chamber(3, 4)) {
    if (n.back() == 0) continue;
    CHECK(exact_moment(p, n, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("clustered-index closed form") {
  const Params p = Params::make(0.6, 0.9, 1.1, {1.3});
  const double t = 0.7;
  for (int k = 1; k <= 5; ++k) {
    const MultiIndex n(static_cast<std::size_t>(k), 1);
    const double want = std::exp(p.R * 1.3 * t * (std::pow(p.q, k) - 1.0) +
                                 p.L / 1.3 * t * (std::pow(p.q, -k) - 1.0));
    CHECK(exact_moment(p, n, t) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("duality verification is tight") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.3, 0.7, 1.1, 0.9});
  const auto rep = verify_duality_identity(p, 300, 20250810);
  CHECK(rep.max_generator_residual < 1e-12);
  CHECK(rep.max_identity_residual < 1e-12);
  CHECK(rep.max_markov_decomp_residual < 1e-12);
}

TEST_CASE("weyl precondition on exact_moment") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.0});
  CHECK_THROWS_AS(exact_moment(p, {1, 2}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(exact_moment(p, {3}, 0.5), std::invalid_argument);
  CHECK(exact_moment(p, {}, 0.5) == 1.0);
}
