#include "qpush/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpush {

void Params::validate() const {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("Params: q must lie in (0,1)");
  if (!(R >= 0.0)) throw std::invalid_argument("Params: R must be >= 0");
  if (!(L >= 0.0)) throw std::invalid_argument("Params: L must be >= 0");
  if (R == 0.0 && L == 0.0)
    throw std::invalid_argument("Params: R and L must not both be zero");
  if (a.empty()) throw std::invalid_argument("Params: speed vector a must be nonempty");
  for (double ai : a)
    if (!(ai > 0.0)) throw std::invalid_argument("Params: all a_i must be positive");
}

Params Params::make(double q, double R, double L, std::vector<double> a) {
  Params p;
  p.q = q;
  p.R = R;
  p.L = L;
  p.a = std::move(a);
  p.validate();
  return p;
}

bool ParticleConfig::valid() const {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i - 1] <= x[i]) return false;
  return !x.empty();
}

ParticleConfig ParticleConfig::step(int N) {
  ParticleConfig cfg;
  cfg.x.resize(static_cast<std::size_t>(N));
  for (int i = 1; i <= N; ++i) cfg.x[static_cast<std::size_t>(i - 1)] = -i;
  return cfg;
}

std::int64_t OccupationState::level() const {
  std::int64_t s = 0;
  for (auto v : y) s += v;
  return s;
}

bool OccupationState::valid() const {
  for (auto v : y)
    if (v < 0) return false;
  return !y.empty();
}

OccupationState OccupationState::moved(int j, int i) const {
  if (i > j || i < 0 || j > N())
    throw std::invalid_argument("OccupationState::moved: need 0 <= i <= j <= N");
  if (y[static_cast<std::size_t>(j)] < 1)
    throw std::invalid_argument("OccupationState::moved: slot j is empty");
  OccupationState out = *this;
  out.y[static_cast<std::size_t>(j)] -= 1;
  out.y[static_cast<std::size_t>(i)] += 1;
  return out;
}

bool is_weyl(const MultiIndex& n, int N) {
  for (std::size_t j = 0; j < n.size(); ++j) {
    if (n[j] < 0 || n[j] > N) return false;
    if (j > 0 && n[j - 1] < n[j]) return false;
  }
  return true;
}

std::vector<MultiIndex> weyl_chamber(int k, int N) {
  std::vector<MultiIndex> out;
  MultiIndex cur(static_cast<std::size_t>(k), 0);
  std::function<void(int, int)> rec = [&](int pos, int hi) {
    if (pos == k) {
      out.push_back(cur);
      return;
    }
    for (int v = hi; v >= 0; --v) {
      cur[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, v);
    }
  };
  rec(0, N);
  return out;
}

std::vector<std::int64_t> gaps(const ParticleConfig& cfg) {
  const int N = cfg.N();
  std::vector<std::int64_t> g(static_cast<std::size_t>(N));
  g[0] = kInfiniteGap;  // virtual x_0 = +inf
  for (int i = 2; i <= N; ++i)
    g[static_cast<std::size_t>(i - 1)] = cfg.x[static_cast<std::size_t>(i - 2)] -
                                         cfg.x[static_cast<std::size_t>(i - 1)] - 1;
  return g;
}

ParticleConfig apply_move(const ParticleConfig& cfg, const Move& mv) {
  ParticleConfig out = cfg;
  if (mv.kind == Move::Kind::RightJump) {
    out.x[static_cast<std::size_t>(mv.initiator - 1)] += 1;
  } else {
    for (int m = mv.initiator; m <= mv.last; ++m)
      out.x[static_cast<std::size_t>(m - 1)] -= 1;
  }
  return out;
}

double observable_H(double q, const ParticleConfig& cfg, const OccupationState& y) {
  if (y.N() != cfg.N())
    throw std::invalid_argument("observable_H: config and occupation sizes disagree");
  if (y.y[0] > 0) return 0.0;  // x_0 = +inf kills the product
  std::int64_t e = 0;
  for (int i = 1; i <= cfg.N(); ++i)
    e += (cfg.x[static_cast<std::size_t>(i - 1)] + i) * y.y[static_cast<std::size_t>(i)];
  return qpow(q, e);
}

OccupationState index_to_occupation(const MultiIndex& n, int N) {
  if (!is_weyl(n, N))
    throw std::invalid_argument("index_to_occupation: n is not in the Weyl chamber");
  OccupationState y;
  y.y.assign(static_cast<std::size_t>(N + 1), 0);
  for (int v : n) y.y[static_cast<std::size_t>(v)] += 1;
  return y;
}

MultiIndex occupation_to_index(const OccupationState& y) {
  if (!y.valid()) throw std::invalid_argument("occupation_to_index: invalid occupation state");
  MultiIndex n;
  n.reserve(static_cast<std::size_t>(y.level()));
  for (int i = y.N(); i >= 0; --i)
    for (std::int64_t c = 0; c < y.y[static_cast<std::size_t>(i)]; ++c) n.push_back(i);
  return n;
}

std::vector<Move> enumerate_moves(const Params& p, const ParticleConfig& cfg) {
  const int N = cfg.N();
  const auto g = gaps(cfg);
  std::vector<Move> moves;

  for (int i = 1; i <= N; ++i) {
    const double rate = p.R * p.a[static_cast<std::size_t>(i - 1)] *
                        (1.0 - qpow_gap(p.q, g[static_cast<std::size_t>(i - 1)]));
    if (rate > 0.0)
      moves.push_back({Move::Kind::RightJump, i, i, rate});
  }

  for (int i = 1; i <= N; ++i) {
    const double li = p.L / p.a[static_cast<std::size_t>(i - 1)];
    if (li == 0.0) continue;
    for (int j = i; j <= N; ++j) {
      // q^{x_i - x_j - (j-i)} * (1 - q^{x_j - x_{j+1} - 1}), last factor 1 at j = N.
      const std::int64_t span = cfg.x[static_cast<std::size_t>(i - 1)] -
                                cfg.x[static_cast<std::size_t>(j - 1)] - (j - i);
      const double blocked =
          (j == N) ? 1.0 : 1.0 - qpow(p.q, g[static_cast<std::size_t>(j)]);
      const double rate = li * qpow(p.q, span) * blocked;
      if (rate > 0.0)
        moves.push_back({Move::Kind::LeftBlock, i, j, rate});
    }
  }
  return moves;
}

double apply_generator_pushasep(const Params& p, const ConfigFn& f, const ParticleConfig& cfg) {
  const double f0 = f(cfg);
  double acc = 0.0;
  for (const auto& mv : enumerate_moves(p, cfg))
    acc += mv.rate * (f(apply_move(cfg, mv)) - f0);
  return acc;
}

double apply_generator_dual(const Params& p, const OccupationFn& g, const OccupationState& y) {
  const int N = y.N();
  const double g0 = g(y);
  double acc = 0.0;

  for (int i = 1; i <= N; ++i) {
    const std::int64_t yi = y.y[static_cast<std::size_t>(i)];
    if (yi == 0) continue;
    acc += p.R * p.a[static_cast<std::size_t>(i - 1)] * (1.0 - qpow(p.q, yi)) *
           (g(y.moved(i, i - 1)) - g0);
  }
  // Second sum weights g(y^{j,i}) directly, not a difference.
  for (int i = 1; i <= N; ++i) {
    const double li = p.L / p.a[static_cast<std::size_t>(i - 1)];
    if (li == 0.0) continue;
    std::int64_t tail = 0;  // y_i + ... + y_{j-1}
    for (int j = i; j <= N; ++j) {
      const std::int64_t yj = y.y[static_cast<std::size_t>(j)];
      if (yj > 0) {
        const double coeff = li * (qpow(p.q, -yj) - 1.0) * qpow(p.q, -tail);
        acc += coeff * (j == i ? g0 : g(y.moved(j, i)));
      }
      tail += yj;
    }
  }
  return acc;
}

double exit_rate_C(const Params& p, const OccupationState& y) {
  const int N = y.N();
  double c = 0.0;
  std::int64_t tail = 0;
  for (int i = N; i >= 1; --i) {
    tail += y.y[static_cast<std::size_t>(i)];
    c += p.L / p.a[static_cast<std::size_t>(i - 1)] * (qpow(p.q, -tail) - 1.0);
  }
  return c;
}

double apply_generator_dual_markov(const Params& p, const OccupationFn& g,
                                   const OccupationState& y) {
  return apply_generator_dual(p, g, y) - exit_rate_C(p, y) * g(y);
}

}  // namespace qpush
