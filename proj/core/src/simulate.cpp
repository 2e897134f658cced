#include "qpush/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qpush/parallel.hpp"
#include "qpush/qfunctions.hpp"
#include "qpush/rng.hpp"
#include "qpush/stats.hpp"

namespace qpush {

namespace {

MomentEstimate to_estimate(const Welford& w) {
  return {w.mean, w.stderr_of_mean(), w.n};
}

// Chunked Monte Carlo driver: trajectory index -> vector of observables.
// The chunk decomposition and the merge order are fixed, so the result is
// identical for any thread count.
std::vector<Welford> run_mc(std::int64_t nsamples, const McOptions& opt, std::size_t nobs,
                            const std::function<void(std::uint64_t, double*)>& sample_one) {
  if (nsamples < 1) throw std::invalid_argument("McOptions: nsamples must be >= 1");
  const int nchunks = std::max(1, std::min<int>(opt.chunks, static_cast<int>(
                                   std::min<std::int64_t>(nsamples, 1 << 20))));
  std::vector<std::vector<Welford>> partial(
      static_cast<std::size_t>(nchunks), std::vector<Welford>(nobs));
  std::vector<double> scratch;
  parallel_for_chunks(nchunks, opt.threads, [&](int c) {
    const std::int64_t lo = nsamples * c / nchunks;
    const std::int64_t hi = nsamples * (c + 1) / nchunks;
    std::vector<double> vals(nobs);
    auto& acc = partial[static_cast<std::size_t>(c)];
    for (std::int64_t idx = lo; idx < hi; ++idx) {
      sample_one(static_cast<std::uint64_t>(idx), vals.data());
      for (std::size_t o = 0; o < nobs; ++o) acc[o].add(vals[o]);
    }
  });
  std::vector<Welford> total(nobs);
  for (int c = 0; c < nchunks; ++c)
    for (std::size_t o = 0; o < nobs; ++o) total[o].merge(partial[static_cast<std::size_t>(c)][o]);
  return total;
}

}  // namespace

ParticleConfig sample_pushasep(const Params& p, const ParticleConfig& x0, double t,
                               std::mt19937_64& rng, Trajectory* record) {
  p.validate();
  if (t < 0.0) throw std::invalid_argument("sample_pushasep: t must be >= 0");
  if (!x0.valid() || x0.N() != p.N())
    throw std::invalid_argument("sample_pushasep: invalid initial configuration");
  if (record) {
    record->initial = x0;
    record->horizon = t;
    record->events.clear();
  }

  const int N = p.N();
  ParticleConfig cfg = x0;
  std::vector<std::int64_t> g = gaps(cfg);

  // right_rate[i-1] = R a_i (1 - q^{gap_i}); left rates are constant L / a_i.
  std::vector<double> right_rate(static_cast<std::size_t>(N));
  auto refresh_right = [&](int i) {
    right_rate[static_cast<std::size_t>(i - 1)] =
        p.R * p.a[static_cast<std::size_t>(i - 1)] *
        (1.0 - qpow_gap(p.q, g[static_cast<std::size_t>(i - 1)]));
  };
  for (int i = 1; i <= N; ++i) refresh_right(i);
  double left_total = 0.0;
  for (int i = 1; i <= N; ++i) left_total += p.L / p.a[static_cast<std::size_t>(i - 1)];

  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double now = 0.0;
  for (;;) {
    double right_total = 0.0;
    for (double r : right_rate) right_total += r;
    const double total = right_total + left_total;
    if (total <= 0.0) break;
    now += exp1(rng) / total;
    if (now > t) break;

    double u = unif(rng) * total;
    Move mv{};
    if (u < right_total) {
      int i = 1;
      for (; i < N; ++i) {
        if (u < right_rate[static_cast<std::size_t>(i - 1)]) break;
        u -= right_rate[static_cast<std::size_t>(i - 1)];
      }
      mv = {Move::Kind::RightJump, i, i, right_rate[static_cast<std::size_t>(i - 1)]};
    } else {
      u -= right_total;
      int i = 1;
      for (; i < N; ++i) {
        const double li = p.L / p.a[static_cast<std::size_t>(i - 1)];
        if (u < li) break;
        u -= li;
      }
      // Cascade of pushes; probabilities use pre-jump gaps.
      int j = i;
      while (j < N) {
        const double push = qpow(p.q, g[static_cast<std::size_t>(j)]);
        if (unif(rng) < push)
          ++j;
        else
          break;
      }
      mv = {Move::Kind::LeftBlock, i, j, p.L / p.a[static_cast<std::size_t>(i - 1)]};
    }

    cfg = apply_move(cfg, mv);
    if (record) record->events.emplace_back(now, mv);

    // Only gaps adjacent to moved particles changed.
    if (mv.kind == Move::Kind::RightJump) {
      const int i = mv.initiator;
      g[static_cast<std::size_t>(i - 1)] = (i == 1) ? kInfiniteGap
                                                    : cfg.x[static_cast<std::size_t>(i - 2)] -
                                                          cfg.x[static_cast<std::size_t>(i - 1)] - 1;
      refresh_right(i);
      if (i < N) {
        g[static_cast<std::size_t>(i)] = cfg.x[static_cast<std::size_t>(i - 1)] -
                                         cfg.x[static_cast<std::size_t>(i)] - 1;
        refresh_right(i + 1);
      }
    } else {
      const int i = mv.initiator, j = mv.last;
      if (i > 1) {
        g[static_cast<std::size_t>(i - 1)] = cfg.x[static_cast<std::size_t>(i - 2)] -
                                             cfg.x[static_cast<std::size_t>(i - 1)] - 1;
        refresh_right(i);
      }
      if (j < N) {
        g[static_cast<std::size_t>(j)] = cfg.x[static_cast<std::size_t>(j - 1)] -
                                         cfg.x[static_cast<std::size_t>(j)] - 1;
        refresh_right(j + 1);
      }
      // Interior gaps of the block are unchanged (the block shifts rigidly).
    }
  }
  return cfg;
}

MomentEstimate mc_moment(const Params& p, const MultiIndex& n, double t,
                         const McOptions& opt) {
  return mc_moments(p, {n}, t, opt)[0];
}

std::vector<MomentEstimate> mc_moments(const Params& p, const std::vector<MultiIndex>& ns,
                                       double t, const McOptions& opt,
                                       const ParticleConfig* x0) {
  p.validate();
  const int N = p.N();
  for (const auto& n : ns)
    if (!is_weyl(n, N))
      throw std::invalid_argument("mc_moments: every n must lie in the Weyl chamber");
  const ParticleConfig init = x0 ? *x0 : ParticleConfig::step(N);

  const double lq = std::log(p.q);
  auto sample_one = [&](std::uint64_t idx, double* out) {
    auto rng = make_stream(opt.seed, idx);
    const ParticleConfig end = sample_pushasep(p, init, t, rng);
    // f_i = q^{x_i + i}; each observable is a product of these.
    std::vector<double> f(static_cast<std::size_t>(N + 1));
    f[0] = 0.0;  // q^{x_0 + 0} with x_0 = +inf
    for (int i = 1; i <= N; ++i)
      f[static_cast<std::size_t>(i)] =
          std::exp(lq * static_cast<double>(end.x[static_cast<std::size_t>(i - 1)] + i));
    for (std::size_t o = 0; o < ns.size(); ++o) {
      double v = 1.0;
      for (int ni : ns[o]) v *= f[static_cast<std::size_t>(ni)];
      out[o] = v;
    }
  };
  const auto acc = run_mc(opt.nsamples, opt, ns.size(), sample_one);
  std::vector<MomentEstimate> out;
  out.reserve(acc.size());
  for (const auto& w : acc) out.push_back(to_estimate(w));
  return out;
}

std::pair<OccupationState, double> sample_dual_weighted(const Params& p,
                                                        const OccupationState& y0,
                                                        double t, std::mt19937_64& rng) {
  p.validate();
  if (t < 0.0) throw std::invalid_argument("sample_dual_weighted: t must be >= 0");
  if (!y0.valid() || y0.N() != p.N())
    throw std::invalid_argument("sample_dual_weighted: invalid initial state");

  const int N = p.N();
  OccupationState y = y0;
  double now = 0.0;
  double log_weight = 0.0;

  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  struct Jump {
    int j, i;
    double rate;
  };
  std::vector<Jump> jumps;

  for (;;) {
    jumps.clear();
    double total = 0.0;
    for (int i = 1; i <= N; ++i) {
      const std::int64_t yi = y.y[static_cast<std::size_t>(i)];
      if (yi > 0 && p.R > 0.0) {
        const double r =
            p.R * p.a[static_cast<std::size_t>(i - 1)] * (1.0 - qpow(p.q, yi));
        if (r > 0.0) {
          jumps.push_back({i, i - 1, r});
          total += r;
        }
      }
    }
    if (p.L > 0.0) {
      for (int i = 1; i <= N; ++i) {
        const double li = p.L / p.a[static_cast<std::size_t>(i - 1)];
        std::int64_t tail = y.y[static_cast<std::size_t>(i)];
        for (int j = i + 1; j <= N; ++j) {
          const std::int64_t yj = y.y[static_cast<std::size_t>(j)];
          if (yj > 0) {
            const double r = li * (qpow(p.q, -yj) - 1.0) * qpow(p.q, -tail);
            jumps.push_back({j, i, r});
            total += r;
          }
          tail += yj;
        }
      }
    }

    const double c = exit_rate_C(p, y);
    const double dt_jump = (total > 0.0) ? exp1(rng) / total : std::numeric_limits<double>::infinity();
    if (now + dt_jump >= t) {
      log_weight += c * (t - now);
      break;
    }
    log_weight += c * dt_jump;
    now += dt_jump;

    double u = unif(rng) * total;
    std::size_t pick = 0;
    for (; pick + 1 < jumps.size(); ++pick) {
      if (u < jumps[pick].rate) break;
      u -= jumps[pick].rate;
    }
    y = y.moved(jumps[pick].j, jumps[pick].i);
  }
  return {y, std::exp(log_weight)};
}

MomentEstimate mc_dual_duality_rhs(const Params& p, const ParticleConfig& x0,
                                   const OccupationState& y0, double t,
                                   const McOptions& opt) {
  auto sample_one = [&](std::uint64_t idx, double* out) {
    auto rng = make_stream(opt.seed, idx);
    const auto [y, w] = sample_dual_weighted(p, y0, t, rng);
    out[0] = observable_H(p.q, x0, y) * w;
  };
  return to_estimate(run_mc(opt.nsamples, opt, 1, sample_one)[0]);
}

bool InterlacingArray::interlaced() const {
  for (int k = 2; k <= N(); ++k)
    for (int j = 2; j <= k; ++j) {
      // lambda^{(k)}_j <= lambda^{(k-1)}_{j-1} <= lambda^{(k)}_{j-1}
      if (!(at(k, j) <= at(k - 1, j - 1) && at(k - 1, j - 1) <= at(k, j - 1)))
        return false;
    }
  return true;
}

std::vector<std::int64_t> InterlacingArray::leftmost_marginal() const {
  std::vector<std::int64_t> x(static_cast<std::size_t>(N()));
  for (int n = 1; n <= N(); ++n) x[static_cast<std::size_t>(n - 1)] = at(n, n) - n;
  return x;
}

InterlacingArray InterlacingArray::packed(int N) {
  InterlacingArray arr;
  arr.rows.resize(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k)
    arr.rows[static_cast<std::size_t>(k - 1)].assign(static_cast<std::size_t>(k), 0);
  return arr;
}

namespace {

// Right-jump rate of lambda^{(k)}_j; factors with nonexistent indices are 1.
double array_right_rate(const Params& p, const InterlacingArray& arr, int k, int j) {
  const double q = p.q;
  double rate = p.R * p.a[static_cast<std::size_t>(k - 1)];
  if (j >= 2) rate *= 1.0 - qpow(q, arr.at(k - 1, j - 1) - arr.at(k, j));
  if (j <= k - 1) {
    rate *= 1.0 - qpow(q, arr.at(k, j) - arr.at(k, j + 1) + 1);
    rate /= 1.0 - qpow(q, arr.at(k, j) - arr.at(k - 1, j) + 1);
  }
  return rate;
}

}  // namespace

InterlacingArray sample_array2d(const Params& p, double t, std::mt19937_64& rng) {
  p.validate();
  if (t < 0.0) throw std::invalid_argument("sample_array2d: t must be >= 0");
  const int N = p.N();
  InterlacingArray arr = InterlacingArray::packed(N);

  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double left_total = 0.0;
  for (int k = 1; k <= N; ++k) left_total += p.L / p.a[static_cast<std::size_t>(k - 1)];

  double now = 0.0;
  for (;;) {
    double right_total = 0.0;
    for (int k = 1; k <= N; ++k)
      for (int j = 1; j <= k; ++j) right_total += array_right_rate(p, arr, k, j);
    const double total = right_total + left_total;
    if (total <= 0.0) break;
    now += exp1(rng) / total;
    if (now > t) break;

    double u = unif(rng) * total;
    if (u < right_total) {
      int pk = 1, pj = 1;
      bool found = false;
      for (int k = 1; k <= N && !found; ++k)
        for (int j = 1; j <= k; ++j) {
          const double r = array_right_rate(p, arr, k, j);
          if (u < r) {
            pk = k;
            pj = j;
            found = true;
            break;
          }
          u -= r;
        }
      // Jump right; push the column of equal upper particles.
      const std::int64_t old = arr.at(pk, pj);
      arr.rows[static_cast<std::size_t>(pk - 1)][static_cast<std::size_t>(pj - 1)] += 1;
      for (int m = pk + 1; m <= N; ++m) {
        if (arr.at(m, pj) == old)
          arr.rows[static_cast<std::size_t>(m - 1)][static_cast<std::size_t>(pj - 1)] += 1;
        else
          break;
      }
    } else {
      u -= right_total;
      int k0 = 1;
      for (; k0 < N; ++k0) {
        const double lk = p.L / p.a[static_cast<std::size_t>(k0 - 1)];
        if (u < lk) break;
        u -= lk;
      }
      // Leftmost particle of level k0 jumps left; the move propagates upward,
      // each level choosing the up-left or up-right neighbor of the mover.
      std::int64_t prev_pos = arr.at(k0, k0);
      arr.rows[static_cast<std::size_t>(k0 - 1)][static_cast<std::size_t>(k0 - 1)] -= 1;
      int jm = k0;
      for (int lev = k0 + 1; lev <= N; ++lev) {
        const std::int64_t d1 = prev_pos - arr.at(lev, jm + 1);
        double ell;
        if (d1 == 0) {
          ell = 1.0;  // interlacing would break otherwise
        } else if (jm + 1 <= lev - 1) {
          const std::int64_t d2 = arr.at(lev, jm + 1) - arr.at(lev - 1, jm + 1);
          const std::int64_t d3 = prev_pos - arr.at(lev - 1, jm + 1);
          ell = (d2 == 0) ? 0.0 : qpow(p.q, d1) * (1.0 - qpow(p.q, d2)) /
                                      (1.0 - qpow(p.q, d3));
        } else {
          ell = qpow(p.q, d1);
        }
        if (unif(rng) < ell) jm = jm + 1;  // up-left neighbor moves
        prev_pos = arr.at(lev, jm);
        arr.rows[static_cast<std::size_t>(lev - 1)][static_cast<std::size_t>(jm - 1)] -= 1;
      }
    }
  }
  return arr;
}

std::vector<MomentEstimate> mc_array2d_moments(const Params& p,
                                               const std::vector<MultiIndex>& ns, double t,
                                               const McOptions& opt) {
  p.validate();
  const int N = p.N();
  for (const auto& n : ns)
    if (!is_weyl(n, N))
      throw std::invalid_argument("mc_array2d_moments: every n must lie in the Weyl chamber");

  const double lq = std::log(p.q);
  auto sample_one = [&](std::uint64_t idx, double* out) {
    auto rng = make_stream(opt.seed, idx);
    const InterlacingArray arr = sample_array2d(p, t, rng);
    const auto x = arr.leftmost_marginal();
    std::vector<double> f(static_cast<std::size_t>(N + 1));
    f[0] = 0.0;
    for (int i = 1; i <= N; ++i)
      f[static_cast<std::size_t>(i)] =
          std::exp(lq * static_cast<double>(x[static_cast<std::size_t>(i - 1)] + i));
    for (std::size_t o = 0; o < ns.size(); ++o) {
      double v = 1.0;
      for (int ni : ns[o]) v *= f[static_cast<std::size_t>(ni)];
      out[o] = v;
    }
  };
  const auto acc = run_mc(opt.nsamples, opt, ns.size(), sample_one);
  std::vector<MomentEstimate> out;
  out.reserve(acc.size());
  for (const auto& w : acc) out.push_back(to_estimate(w));
  return out;
}

ComplexMomentEstimate mc_qlaplace(const Params& p, int n_index, double t,
                                  std::complex<double> zeta, const McOptions& opt) {
  p.validate();
  if (n_index < 1 || n_index > p.N())
    throw std::invalid_argument("mc_qlaplace: particle index out of range");
  if (zeta.imag() == 0.0 && zeta.real() > 0.0)
    throw std::invalid_argument("mc_qlaplace: zeta must avoid the positive real axis");

  const ParticleConfig init = ParticleConfig::step(p.N());
  // The estimator is real for real zeta, complex otherwise; accumulate both parts.
  std::vector<WelfordComplex> partial(static_cast<std::size_t>(opt.chunks));
  const std::int64_t nsamples = opt.nsamples;
  const int nchunks = std::max(1, opt.chunks);
  parallel_for_chunks(nchunks, opt.threads, [&](int c) {
    const std::int64_t lo = nsamples * c / nchunks;
    const std::int64_t hi = nsamples * (c + 1) / nchunks;
    auto& acc = partial[static_cast<std::size_t>(c)];
    for (std::int64_t idx = lo; idx < hi; ++idx) {
      auto rng = make_stream(opt.seed, static_cast<std::uint64_t>(idx));
      const ParticleConfig end = sample_pushasep(p, init, t, rng);
      const std::int64_t e = end.x[static_cast<std::size_t>(n_index - 1)] + n_index;
      const std::complex<double> arg = zeta * qpow(p.q, e);
      acc.add(1.0 / qpoch_inf(arg, p.q));
    }
  });
  WelfordComplex total;
  for (const auto& w : partial) total.merge(w);
  return {total.mean, total.stderr_of_mean(), total.n};
}

MomentEstimate mc_last_particle_left_moves(const Params& p, double t, const McOptions& opt) {
  p.validate();
  const int N = p.N();
  const ParticleConfig init = ParticleConfig::step(N);
  auto sample_one = [&](std::uint64_t idx, double* out) {
    auto rng = make_stream(opt.seed, idx);
    Trajectory traj;
    sample_pushasep(p, init, t, rng, &traj);
    std::int64_t count = 0;
    for (const auto& [_, mv] : traj.events)
      if (mv.kind == Move::Kind::LeftBlock && mv.last == N) ++count;
    out[0] = static_cast<double>(count);
  };
  return to_estimate(run_mc(opt.nsamples, opt, 1, sample_one)[0]);
}

}  // namespace qpush
