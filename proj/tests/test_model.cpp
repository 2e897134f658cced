#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qpush/model.hpp"
#include "qpush/rng.hpp"

using namespace qpush;

namespace {

Params base_params(double q = 0.5, double R = 1.0, double L = 1.0, int N = 2) {
  return Params::make(q, R, L, std::vector<double>(static_cast<std::size_t>(N), 1.0));
}

ParticleConfig random_cfg(int N, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> start(-6, 6);
  std::uniform_int_distribution<std::int64_t> step(1, 3);
  ParticleConfig cfg;
  cfg.x.resize(static_cast<std::size_t>(N));
  std::int64_t cur = start(rng);
  for (int i = 0; i < N; ++i) {
    cfg.x[static_cast<std::size_t>(i)] = cur;
    cur -= step(rng);
  }
  return cfg;
}

const Move* find_move(const std::vector<Move>& moves, Move::Kind kind, int i, int j) {
  for (const auto& m : moves)
    if (m.kind == kind && m.initiator == i && m.last == j) return &m;
  return nullptr;
}

}  // namespace

TEST_CASE("parameter validation names the violated constraint") {
  CHECK_THROWS_AS(Params::make(1.2, 1, 1, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Params::make(0.5, -1, 1, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Params::make(0.5, 0, 0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Params::make(0.5, 1, 1, {1.0, -2.0}), std::invalid_argument);
  CHECK_NOTHROW(Params::make(0.5, 1, 0, {1.0}));
}

TEST_CASE("gaps") {
  ParticleConfig step3 = ParticleConfig::step(3);
  const auto g = gaps(step3);
  CHECK(g[0] == kInfiniteGap);
  CHECK(g[1] == 0);
  CHECK(g[2] == 0);

  ParticleConfig two;
  two.x = {5, 1};
  const auto g2 = gaps(two);
  CHECK(g2[0] == kInfiniteGap);
  CHECK(g2[1] == 3);

  auto rng = make_stream(3, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto cfg = random_cfg(4, rng);
    const auto gg = gaps(cfg);
    for (std::size_t i = 1; i < gg.size(); ++i) CHECK(gg[i] >= 0);
  }
}

TEST_CASE("observable H") {
  const double q = 0.5;
  ParticleConfig step3 = ParticleConfig::step(3);
  OccupationState y;
  y.y = {0, 2, 0, 1};
  CHECK(observable_H(q, step3, y) == 1.0);  // all exponents vanish on the step state

  y.y = {1, 0, 0, 0};
  CHECK(observable_H(q, step3, y) == 0.0);  // mass at slot zero kills the product

  ParticleConfig cfg;
  cfg.x = {0, -2};
  OccupationState y2;
  y2.y = {0, 1, 1};
  // q^{(0+1)*1} * q^{(-2+2)*1} = q
  CHECK(observable_H(q, cfg, y2) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("index <-> occupation bijection") {
  const MultiIndex n = {5, 5, 4, 2, 1, 1, 1};
  const auto y = index_to_occupation(n, 5);
  CHECK(y.y == std::vector<std::int64_t>{0, 3, 1, 0, 1, 2});
  CHECK(occupation_to_index(y) == n);

  const MultiIndex empty;
  CHECK(index_to_occupation(empty, 4).level() == 0);

  CHECK_THROWS_AS(index_to_occupation({1, 2}, 3), std::invalid_argument);  // not weakly decreasing

  // round trip over the whole chamber, k <= 6, N <= 5
  for (int N = 1; N <= 5; ++N)
    for (int k = 1; k <= 6; ++k)
      for (const auto& nn : weyl_chamber(k, N))
        CHECK(occupation_to_index(index_to_occupation(nn, N)) == nn);
}

TEST_CASE("move enumeration on the step state, N=2") {
  const double q = 0.5, R = 1.3, L = 0.7;
  const Params p = Params::make(q, R, L, {1.0, 1.0});
  const auto moves = enumerate_moves(p, ParticleConfig::step(2));
  // gap_2 = 0: the right jump of particle 2 is excluded, and a left jump of
  // particle 1 always drags particle 2 along (push probability q^0 = 1).
  CHECK(moves.size() == 3);
  const Move* rj1 = find_move(moves, Move::Kind::RightJump, 1, 1);
  REQUIRE(rj1 != nullptr);
  CHECK(rj1->rate == doctest::Approx(R));
  CHECK(find_move(moves, Move::Kind::RightJump, 2, 2) == nullptr);
  const Move* blk = find_move(moves, Move::Kind::LeftBlock, 1, 2);
  REQUIRE(blk != nullptr);
  CHECK(blk->rate == doctest::Approx(L));
  const Move* single2 = find_move(moves, Move::Kind::LeftBlock, 2, 2);
  REQUIRE(single2 != nullptr);
  CHECK(single2->rate == doctest::Approx(L));
}

TEST_CASE("move enumeration with one empty site between the particles") {
  const double q = 0.5, R = 1.0, L = 1.0;
  const Params p = Params::make(q, R, L, {1.0, 1.0});
  ParticleConfig cfg;
  cfg.x = {0, -2};  // gap_2 = 1
  const auto moves = enumerate_moves(p, cfg);
  CHECK(moves.size() == 5);
  CHECK(find_move(moves, Move::Kind::RightJump, 1, 1)->rate == doctest::Approx(R));
  CHECK(find_move(moves, Move::Kind::RightJump, 2, 2)->rate == doctest::Approx(R * (1 - q)));
  CHECK(find_move(moves, Move::Kind::LeftBlock, 1, 1)->rate == doctest::Approx(L * (1 - q)));
  CHECK(find_move(moves, Move::Kind::LeftBlock, 1, 2)->rate == doctest::Approx(L * q));
  CHECK(find_move(moves, Move::Kind::LeftBlock, 2, 2)->rate == doctest::Approx(L));
}

TEST_CASE("single particle has two moves") {
  const Params p = Params::make(0.4, 2.0, 3.0, {1.6});
  const auto moves = enumerate_moves(p, ParticleConfig::step(1));
  CHECK(moves.size() == 2);
  CHECK(find_move(moves, Move::Kind::RightJump, 1, 1)->rate == doctest::Approx(2.0 * 1.6));
  CHECK(find_move(moves, Move::Kind::LeftBlock, 1, 1)->rate == doctest::Approx(3.0 / 1.6));
}

TEST_CASE("left rates telescope to L / a_i") {
  auto rng = make_stream(11, 0);
  const Params p = Params::make(0.45, 1.0, 0.8, {1.0, 1.4, 0.7, 1.1});
  for (int rep = 0; rep < 40; ++rep) {
    const auto cfg = random_cfg(4, rng);
    const auto moves = enumerate_moves(p, cfg);
    for (int i = 1; i <= 4; ++i) {
      double total = 0.0;
      for (const auto& m : moves)
        if (m.kind == Move::Kind::LeftBlock && m.initiator == i) total += m.rate;
      CHECK(total ==
            doctest::Approx(p.L / p.a[static_cast<std::size_t>(i - 1)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("moves preserve the strict particle order") {
  auto rng = make_stream(12, 0);
  const Params p = Params::make(0.6, 1.0, 1.0, {1.0, 0.8, 1.2});
  for (int rep = 0; rep < 100; ++rep) {
    const auto cfg = random_cfg(3, rng);
    for (const auto& m : enumerate_moves(p, cfg)) CHECK(apply_move(cfg, m).valid());
  }
}

TEST_CASE("generator kills constants and matches the single-particle formula") {
  const Params p = base_params(0.5, 1.2, 0.9, 2);
  auto rng = make_stream(13, 0);
  const auto cfg = random_cfg(2, rng);
  CHECK(apply_generator_pushasep(p, [](const ParticleConfig&) { return 3.7; }, cfg) ==
        doctest::Approx(0.0));

  const Params p1 = Params::make(0.5, 1.2, 0.9, {1.4});
  ParticleConfig one;
  one.x = {3};
  const double q = p1.q;
  auto f = [&](const ParticleConfig& c) { return std::pow(q, double(c.x[0] + 1)); };
  const double got = apply_generator_pushasep(p1, f, one);
  const double want = p1.R * 1.4 * f(one) * (q - 1.0) + p1.L / 1.4 * f(one) * (1.0 / q - 1.0);
  CHECK(got == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("dual operator on constants gives the exit rate") {
  const double q = 0.5, L = 0.8;
  const Params p = Params::make(q, 1.0, L, {1.0, 1.0});
  OccupationState y;
  y.y = {0, 1, 1};
  // Telescoping the inner sum of the dual operator over j gives
  // sum_i (L/a_i)(q^{-(y_i+...+y_N)} - 1): here L((q^{-2}-1) + (q^{-1}-1)) = 5L.
  CHECK(exit_rate_C(p, y) == doctest::Approx(5.0 * L).epsilon(1e-13));
  const double via_dual =
      apply_generator_dual(p, [](const OccupationState&) { return 1.0; }, y);
  CHECK(via_dual == doctest::Approx(exit_rate_C(p, y)).epsilon(1e-13));

  // Markov part kills constants.
  CHECK(apply_generator_dual_markov(p, [](const OccupationState&) { return 1.0; }, y) ==
        doctest::Approx(0.0));

  // All-empty state: every term vanishes.
  OccupationState zero;
  zero.y = {0, 0, 0};
  CHECK(exit_rate_C(p, zero) == 0.0);
  CHECK(apply_generator_dual(p, [](const OccupationState&) { return 2.0; }, zero) == 0.0);
}

TEST_CASE("dual Markov rates are nonnegative") {
  const Params p = Params::make(0.35, 1.1, 0.9, {1.0, 1.3, 0.8});
  auto rng = make_stream(14, 0);
  std::uniform_int_distribution<int> slot(0, 3), lvl(0, 5);
  for (int rep = 0; rep < 60; ++rep) {
    OccupationState y;
    y.y.assign(4, 0);
    const int k = lvl(rng);
    for (int j = 0; j < k; ++j) y.y[static_cast<std::size_t>(slot(rng))] += 1;
    // R-part rates
    for (int i = 1; i <= 3; ++i)
      CHECK(p.R * p.a[static_cast<std::size_t>(i - 1)] *
                (1.0 - qpow(p.q, y.y[static_cast<std::size_t>(i)])) >=
            0.0);
    // L-part rates
    for (int i = 1; i <= 3; ++i) {
      std::int64_t tail = y.y[static_cast<std::size_t>(i)];
      for (int j = i + 1; j <= 3; ++j) {
        const double r = p.L / p.a[static_cast<std::size_t>(i - 1)] *
                         (qpow(p.q, -y.y[static_cast<std::size_t>(j)]) - 1.0) *
                         qpow(p.q, -tail);
        CHECK(r >= 0.0);
        tail += y.y[static_cast<std::size_t>(j)];
      }
    }
  }
}

TEST_CASE("weyl chamber enumeration and membership") {
  CHECK(is_weyl({3, 2, 2, 0}, 3));
  CHECK_FALSE(is_weyl({2, 3}, 3));
  CHECK_FALSE(is_weyl({4, 1}, 3));
  CHECK(weyl_chamber(2, 3).size() == 10);  // binomial(2+3, 3) / ... = C(5,2)
  CHECK(weyl_chamber(3, 4).size() == 35);
}
