#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "qpush/evolve.hpp"
#include "qpush/rng.hpp"
#include "qpush/simulate.hpp"
#include "qpush/stats.hpp"

using namespace qpush;

TEST_CASE("zero horizon returns the initial configuration") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.0, 1.0});
  auto rng = make_stream(1, 0);
  const auto x0 = ParticleConfig::step(3);
  CHECK(sample_pushasep(p, x0, 0.0, rng).x == x0.x);
  CHECK_THROWS_AS(sample_pushasep(p, x0, -0.1, rng), std::invalid_argument);
}

TEST_CASE("trajectories are deterministic and valid") {
  const Params p = Params::make(0.4, 1.2, 0.8, {1.0, 1.3, 0.7});
  const auto x0 = ParticleConfig::step(3);
  auto r1 = make_stream(99, 5);
  auto r2 = make_stream(99, 5);
  Trajectory t1, t2;
  const auto e1 = sample_pushasep(p, x0, 2.0, r1, &t1);
  const auto e2 = sample_pushasep(p, x0, 2.0, r2, &t2);
  CHECK(e1.x == e2.x);
  CHECK(t1.events.size() == t2.events.size());

  double prev = 0.0;
  ParticleConfig cur = x0;
  for (const auto& [time, mv] : t1.events) {
    CHECK(time > prev);
    CHECK(time <= t1.horizon);
    prev = time;
    cur = apply_move(cur, mv);
    CHECK(cur.valid());
  }
  CHECK(cur.x == e1.x);
}

TEST_CASE("estimates do not depend on the thread count") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.0});
  McOptions a;
  a.nsamples = 4000;
  a.seed = 7;
  a.threads = 1;
  McOptions b = a;
  b.threads = 2;
  const auto ea = mc_moment(p, {1}, 0.7, a);
  const auto eb = mc_moment(p, {1}, 0.7, b);
  CHECK(ea.mean == eb.mean);
  CHECK(ea.stderr_ == eb.stderr_);
}

TEST_CASE("pure left jumps of a single particle are Poisson") {
  const Params p = Params::make(0.5, 0.0, 1.3, {0.9});
  const double t = 1.0;
  McOptions opt;
  opt.nsamples = 100000;
  opt.seed = 11;
  // displacement observable via a one-off accumulation
  Welford disp;
  for (std::int64_t i = 0; i < opt.nsamples; ++i) {
    auto rng = make_stream(opt.seed, static_cast<std::uint64_t>(i));
    const auto end = sample_pushasep(p, ParticleConfig::step(1), t, rng);
    disp.add(static_cast<double>(end.x[0] + 1));
  }
  const double want = -p.L / 0.9 * t;
  CHECK(std::abs(disp.mean - want) <= 4.0 * disp.stderr_of_mean());
  // Poisson variance equals the mean rate
  CHECK(std::abs(disp.variance() - p.L / 0.9 * t) < 5.0 * disp.variance() /
                                                        std::sqrt(double(opt.nsamples) / 2));
}

TEST_CASE("first-particle q-moment matches the closed form") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.0, 1.0});
  const double t = 0.8;
  McOptions opt;
  opt.nsamples = 100000;
  opt.seed = 13;
  const auto est = mc_moment(p, {1}, t, opt);
  const double want = std::exp(p.R * t * (p.q - 1.0) + p.L * t * (1.0 / p.q - 1.0));
  CHECK(std::abs(est.mean - want) <= 4.0 * est.stderr_);
}

TEST_CASE("moment estimates at t = 0 are exactly one") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.0});
  McOptions opt;
  opt.nsamples = 100;
  opt.seed = 3;
  const auto est = mc_moment(p, {2, 1}, 0.0, opt);
  CHECK(est.mean == 1.0);
  CHECK(est.stderr_ == 0.0);
}

TEST_CASE("two-index moment agrees with the exact oracle") {
  const Params p = Params::make(0.5, 1.0, 0.7, {1.0, 1.0});
  const double t = 0.6;
  McOptions opt;
  opt.nsamples = 100000;
  opt.seed = 17;
  const auto est = mc_moment(p, {1, 1}, t, opt);
  const double exact = exact_moment(p, {1, 1}, t);
  CHECK(std::abs(est.mean - exact) <= 4.0 * est.stderr_);
}

TEST_CASE("weighted dual process: degenerate cases") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.0});
  OccupationState y0;
  y0.y = {0, 1, 1};
  auto rng = make_stream(5, 0);
  const auto [y, w] = sample_dual_weighted(p, y0, 0.0, rng);
  CHECK(y.y == y0.y);
  CHECK(w == 1.0);

  const Params pL0 = Params::make(0.5, 1.0, 0.0, {1.0, 1.0});
  for (int rep = 0; rep < 20; ++rep) {
    auto r = make_stream(6, static_cast<std::uint64_t>(rep));
    const auto [yy, ww] = sample_dual_weighted(pL0, y0, 0.9, r);
    CHECK(ww == 1.0);  // C is proportional to L
    CHECK(yy.level() == y0.level());
  }
}

TEST_CASE("generalized duality: weighted dual expectation matches the ODE solution") {
  const Params p = Params::make(0.5, 1.0, 0.8, {1.0, 1.2});
  const double t = 0.35;
  const auto x0 = ParticleConfig::step(2);
  OccupationState y0;
  y0.y = {0, 1, 1};

  // E^x H(x(t), y0) from the triangular solve.
  const auto sol = solve_true_evolution(p, x0, static_cast<int>(y0.level()), t);
  const double lhs = sol.value(y0);

  McOptions opt;
  opt.nsamples = 200000;
  opt.seed = 23;
  const auto rhs = mc_dual_duality_rhs(p, x0, y0, t, opt);
  CHECK(std::abs(rhs.mean - lhs) <= 4.0 * rhs.stderr_);

  // Two-sided Monte Carlo variant.
  const auto fwd = mc_moments(p, {occupation_to_index(y0)}, t, opt)[0];
  const double comb = std::sqrt(fwd.stderr_ * fwd.stderr_ + rhs.stderr_ * rhs.stderr_);
  CHECK(std::abs(fwd.mean - rhs.mean) <= 4.0 * comb);
}

TEST_CASE("interlacing array: packed start, preserved interlacing, marginals") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.0, 1.0});
  auto rng = make_stream(31, 0);
  const auto arr0 = sample_array2d(p, 0.0, rng);
  for (int k = 1; k <= 3; ++k)
    for (int j = 1; j <= k; ++j) CHECK(arr0.at(k, j) == 0);

  for (int rep = 0; rep < 200; ++rep) {
    auto r = make_stream(32, static_cast<std::uint64_t>(rep));
    const auto arr = sample_array2d(p, 0.8, r);
    CHECK(arr.interlaced());
  }
}

TEST_CASE("array marginal matches the exact moments") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.0, 1.0});
  const double t = 0.5;
  McOptions opt;
  opt.nsamples = 60000;
  opt.seed = 37;
  const std::vector<MultiIndex> ns = {{1}, {2}, {3}, {2, 1}};
  const auto est = mc_array2d_moments(p, ns, t, opt);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double exact = exact_moment(p, ns[i], t);
    CHECK(std::abs(est[i].mean - exact) <= 4.0 * std::max(est[i].stderr_, 1e-6));
  }
}

TEST_CASE("q-Laplace estimator") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.0});
  McOptions opt;
  opt.nsamples = 5000;
  opt.seed = 41;
  CHECK_THROWS_AS(mc_qlaplace(p, 1, 0.5, {0.7, 0.0}, opt), std::invalid_argument);

  const auto at0 = mc_qlaplace(p, 1, 0.5, {0.0, 0.0}, opt);
  CHECK(at0.mean.real() == 1.0);
  CHECK(at0.stderr_ == 0.0);

  const std::complex<double> zeta{-0.4, 0.0};
  const auto t0 = mc_qlaplace(p, 1, 0.0, zeta, opt);
  CHECK(std::abs(t0.mean - 1.0 / qpoch_inf(zeta, p.q)) < 1e-12);
  CHECK(t0.stderr_ < 1e-12);
}

TEST_CASE("left moves of the last particle are dominated by the push Poisson rate") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0, 1.3, 0.8});
  const double t = 1.0;
  McOptions opt;
  opt.nsamples = 20000;
  opt.seed = 43;
  const auto est = mc_last_particle_left_moves(p, t, opt);
  double bound = 0.0;
  for (double a : p.a) bound += p.L / a;
  bound *= t;
  CHECK(est.mean <= bound + 4.0 * est.stderr_);
}

TEST_CASE("law of the first particle does not depend on N") {
  const double t = 0.9;
  McOptions opt;
  opt.nsamples = 40000;
  opt.seed = 47;

  auto histogram = [&](int N) {
    const Params p = Params::make(0.5, 1.0, 1.0, std::vector<double>(N, 1.0));
    std::map<std::int64_t, std::int64_t> h;
    for (std::int64_t i = 0; i < opt.nsamples; ++i) {
      auto rng = make_stream(opt.seed + static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(i));
      const auto end = sample_pushasep(p, ParticleConfig::step(N), t, rng);
      h[end.x[0]] += 1;
    }
    return h;
  };
  const auto h1 = histogram(1);
  const auto h3 = histogram(3);

  // two-sample chi-square over the pooled support, rare bins merged
  double stat = 0.0;
  int bins = 0;
  double tail1 = 0.0, tail3 = 0.0;
  for (std::int64_t v = -8; v <= 8; ++v) {
    const double o1 = h1.count(v) ? static_cast<double>(h1.at(v)) : 0.0;
    const double o3 = h3.count(v) ? static_cast<double>(h3.at(v)) : 0.0;
    if (o1 + o3 < 20.0) {
      tail1 += o1;
      tail3 += o3;
      continue;
    }
    const double d = o1 - o3;
    stat += d * d / (o1 + o3);
    ++bins;
  }
  if (tail1 + tail3 >= 20.0) {
    const double d = tail1 - tail3;
    stat += d * d / (tail1 + tail3);
    ++bins;
  }
  CHECK(chi_square_pvalue(stat, bins - 1) > 0.01);
}
