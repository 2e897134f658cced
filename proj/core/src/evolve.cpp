#include "qpush/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "qpush/rng.hpp"

namespace qpush {

namespace {

// Ascending lexicographic order on the reversed tuple (y_N, ..., y_0).
bool tail_less(const OccupationState& a, const OccupationState& b) {
  for (int i = a.N(); i >= 0; --i) {
    const auto va = a.y[static_cast<std::size_t>(i)];
    const auto vb = b.y[static_cast<std::size_t>(i)];
    if (va != vb) return va < vb;
  }
  return false;
}

void enumerate_level_set(int N, int k, std::vector<OccupationState>& out) {
  OccupationState cur;
  cur.y.assign(static_cast<std::size_t>(N + 1), 0);
  // Fill slots 0..N with total k.
  std::function<void(int, std::int64_t)> rec = [&](int slot, std::int64_t rem) {
    if (slot == N) {
      cur.y[static_cast<std::size_t>(N)] = rem;
      out.push_back(cur);
      return;
    }
    for (std::int64_t v = 0; v <= rem; ++v) {
      cur.y[static_cast<std::size_t>(slot)] = v;
      rec(slot + 1, rem - v);
    }
    cur.y[static_cast<std::size_t>(slot)] = 0;
  };
  rec(0, k);
  std::sort(out.begin(), out.end(), tail_less);
}

}  // namespace

int DualGeneratorMatrix::index_of(const OccupationState& y) const {
  auto it = std::lower_bound(basis.begin(), basis.end(), y, tail_less);
  if (it == basis.end() || it->y != y.y) return -1;
  return static_cast<int>(it - basis.begin());
}

bool DualGeneratorMatrix::lower_triangular(double tol) const {
  const int d = dim();
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c)
      if (std::abs(at(r, c)) > tol) return false;
  return true;
}

DualGeneratorMatrix build_dual_generator(const Params& p, int k, std::int64_t dim_cap) {
  p.validate();
  if (k < 1) throw std::invalid_argument("build_dual_generator: k must be >= 1");
  const int N = p.N();
  const double d = binomial(k + N, N);
  if (d > static_cast<double>(dim_cap))
    throw std::invalid_argument("build_dual_generator: level-set dimension exceeds cap");

  DualGeneratorMatrix gen;
  gen.N = N;
  gen.k = k;
  enumerate_level_set(N, k, gen.basis);
  const int dim = gen.dim();
  gen.entries.assign(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), 0.0);

  auto add = [&](int row, int col, double v) {
    gen.entries[static_cast<std::size_t>(row) * static_cast<std::size_t>(dim) +
                static_cast<std::size_t>(col)] += v;
  };

  for (int row = 0; row < dim; ++row) {
    const OccupationState& y = gen.basis[static_cast<std::size_t>(row)];
    for (int i = 1; i <= N; ++i) {
      const std::int64_t yi = y.y[static_cast<std::size_t>(i)];
      if (yi == 0) continue;
      const double r = p.R * p.a[static_cast<std::size_t>(i - 1)] * (1.0 - qpow(p.q, yi));
      if (r != 0.0) {
        add(row, gen.index_of(y.moved(i, i - 1)), r);
        add(row, row, -r);
      }
    }
    for (int i = 1; i <= N; ++i) {
      const double li = p.L / p.a[static_cast<std::size_t>(i - 1)];
      if (li == 0.0) continue;
      std::int64_t tail = 0;
      for (int j = i; j <= N; ++j) {
        const std::int64_t yj = y.y[static_cast<std::size_t>(j)];
        if (yj > 0) {
          const double coeff = li * (qpow(p.q, -yj) - 1.0) * qpow(p.q, -tail);
          add(row, j == i ? row : gen.index_of(y.moved(j, i)), coeff);
        }
        tail += yj;
      }
    }
  }
  return gen;
}

std::vector<double> initial_data(const Params& p, const DualGeneratorMatrix& gen,
                                 const ParticleConfig& x0) {
  if (x0.N() != gen.N)
    throw std::invalid_argument("initial_data: configuration size mismatch");
  std::vector<double> h0(static_cast<std::size_t>(gen.dim()));
  for (int i = 0; i < gen.dim(); ++i)
    h0[static_cast<std::size_t>(i)] =
        observable_H(p.q, x0, gen.basis[static_cast<std::size_t>(i)]);
  return h0;
}

std::vector<double> propagate(const DualGeneratorMatrix& gen, const std::vector<double>& h0,
                              double t) {
  if (t < 0.0) throw std::invalid_argument("propagate: t must be >= 0");
  const int dim = gen.dim();
  if (static_cast<int>(h0.size()) != dim)
    throw std::invalid_argument("propagate: initial data size mismatch");
  Eigen::MatrixXd M(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) M(r, c) = gen.at(r, c);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(h0.data(), dim);
  // Scaling-and-squaring with order selection from the matrix norm.
  Eigen::MatrixXd E = (t * M).exp();
  Eigen::VectorXd out = E * v;
  return std::vector<double>(out.data(), out.data() + dim);
}

double TrueEvolutionSolution::value(const OccupationState& y) const {
  const int idx = gen.index_of(y);
  if (idx < 0) throw std::invalid_argument("TrueEvolutionSolution: state not on this level set");
  return h[static_cast<std::size_t>(idx)];
}

TrueEvolutionSolution solve_true_evolution(const Params& p, const ParticleConfig& x0,
                                           int k, double t) {
  TrueEvolutionSolution sol;
  sol.gen = build_dual_generator(p, k);
  sol.h = propagate(sol.gen, initial_data(p, sol.gen, x0), t);
  return sol;
}

double exact_moment(const Params& p, const MultiIndex& n, double t) {
  return exact_moment(p, n, t, ParticleConfig::step(p.N()));
}

double exact_moment(const Params& p, const MultiIndex& n, double t,
                    const ParticleConfig& x0) {
  if (n.empty()) return 1.0;
  if (!is_weyl(n, p.N()))
    throw std::invalid_argument("exact_moment: n must lie in the Weyl chamber");
  const auto sol = solve_true_evolution(p, x0, static_cast<int>(n.size()), t);
  return sol.value(index_to_occupation(n, p.N()));
}

namespace {

ParticleConfig random_config(int N, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> start(-8, 8);
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

OccupationState random_occupation(int N, int max_level, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> lvl(0, max_level);
  std::uniform_int_distribution<int> slot(0, N);
  OccupationState y;
  y.y.assign(static_cast<std::size_t>(N + 1), 0);
  const int k = lvl(rng);
  for (int j = 0; j < k; ++j) y.y[static_cast<std::size_t>(slot(rng))] += 1;
  return y;
}

}  // namespace

DualityReport verify_duality_identity(const Params& p, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("verify_duality_identity: trials must be >= 1");
  p.validate();
  const int N = p.N();
  auto rng = make_stream(seed, 0);
  DualityReport rep;
  rep.trials = trials;

  for (int trial = 0; trial < trials; ++trial) {
    const ParticleConfig cfg = random_config(N, rng);
    const OccupationState y = random_occupation(N, 6, rng);
    const double H0 = observable_H(p.q, cfg, y);

    const double lhs = apply_generator_pushasep(
        p, [&](const ParticleConfig& c) { return observable_H(p.q, c, y); }, cfg);
    const double rhs = apply_generator_dual(
        p, [&](const OccupationState& yy) { return observable_H(p.q, cfg, yy); }, y);
    const double scale = 1.0 + std::max(std::abs(lhs), std::abs(rhs));
    rep.max_generator_residual =
        std::max(rep.max_generator_residual, std::abs(lhs - rhs) / scale);

    const double markov = apply_generator_dual_markov(
        p, [&](const OccupationState& yy) { return observable_H(p.q, cfg, yy); }, y);
    rep.max_markov_decomp_residual =
        std::max(rep.max_markov_decomp_residual,
                 std::abs(lhs - markov - exit_rate_C(p, y) * H0) / scale);

    // Component identities from the proof of the duality proposition.
    auto record = [&](double got, double want) {
      const double s = 1.0 + std::abs(want);
      rep.max_identity_residual =
          std::max(rep.max_identity_residual, std::abs(got - want) / s);
    };
    const auto g = gaps(cfg);
    for (int i = 1; i <= N; ++i) {
      // H(x^+_i, y) - H(x, y) = (q^{y_i} - 1) H(x, y)
      Move up{Move::Kind::RightJump, i, i, 1.0};
      record(observable_H(p.q, apply_move(cfg, up), y) - H0,
             (qpow(p.q, y.y[static_cast<std::size_t>(i)]) - 1.0) * H0);

      // (1 - q^{gap_i}) H = H(x, y) - H(x, y^{i,i-1})
      if (y.y[static_cast<std::size_t>(i)] >= 1)
        record((1.0 - qpow_gap(p.q, g[static_cast<std::size_t>(i - 1)])) * H0,
               H0 - observable_H(p.q, cfg, y.moved(i, i - 1)));

      for (int j = i; j <= N; ++j) {
        // H(x^-_{j,i}, y) - H = (q^{-y_i-...-y_j} - 1) H
        Move blk{Move::Kind::LeftBlock, i, j, 1.0};
        std::int64_t s = 0;
        for (int m = i; m <= j; ++m) s += y.y[static_cast<std::size_t>(m)];
        record(observable_H(p.q, apply_move(cfg, blk), y) - H0,
               (qpow(p.q, -s) - 1.0) * H0);

        // q^{x_i-x_j-(j-i)} (1 - q^{gap_{j+1}}) H = H(x, y^{j,i}) - H(x, y^{j+1,i}),
        // with the j = N term using the -inf sentinel (second term vanishes).
        if (y.y[static_cast<std::size_t>(j)] >= 1 &&
            (j == N || y.y[static_cast<std::size_t>(j + 1)] >= 1)) {
          const std::int64_t span = cfg.x[static_cast<std::size_t>(i - 1)] -
                                    cfg.x[static_cast<std::size_t>(j - 1)] - (j - i);
          const double blocked =
              (j == N) ? 1.0 : 1.0 - qpow(p.q, g[static_cast<std::size_t>(j)]);
          const double second =
              (j == N) ? 0.0 : observable_H(p.q, cfg, y.moved(j + 1, i));
          record(qpow(p.q, span) * blocked * H0,
                 observable_H(p.q, cfg, y.moved(j, i)) - second);
        }
      }
    }
  }
  return rep;
}

}  // namespace qpush
