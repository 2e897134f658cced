#include "qpush/stationary.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "qpush/qfunctions.hpp"
#include "qpush/rng.hpp"
#include "qpush/stats.hpp"

namespace qpush {

void QGeoLaw::validate() const {
  if (!(beta >= 0.0 && beta < 1.0))
    throw std::invalid_argument("QGeoLaw: beta must lie in [0,1)");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("QGeoLaw: q must lie in (0,1)");
}

double qgeo_pmf(const QGeoLaw& law, int k) {
  law.validate();
  if (k < 0) throw std::invalid_argument("qgeo_pmf: k must be >= 0");
  return qpoch_inf(law.beta, law.q) * std::pow(law.beta, k) / qq_factorial(law.q, k);
}

double qgeo_mean_qpow(const QGeoLaw& law, double tail_tol) {
  law.validate();
  double acc = 0.0, qk = 1.0;
  for (int k = 0; k < 10000; ++k) {
    const double p = qgeo_pmf(law, k);
    acc += qk * p;
    if (p < tail_tol && k > 4) break;
    qk *= law.q;
  }
  return acc;
}

double push_rate_sum(const Params& p, double alpha, double tail_tol) {
  p.validate();
  if (!(alpha > 0.0 && alpha < p.R))
    throw std::invalid_argument("push_rate_sum: need 0 < alpha < R");
  const double ratio = 1.0 - alpha / p.R;  // E q^{gap} under qGeo(alpha/R)
  double acc = 0.0, term = p.L;
  for (int m = 0; m < 100000; ++m) {
    acc += term;
    term *= ratio;
    if (term < tail_tol * p.L) break;
  }
  return acc;
}

double push_rate_sum_inhomogeneous(const Params& p, double alpha,
                                   const std::vector<double>& window_speeds) {
  p.validate();
  if (!(alpha > 0.0)) throw std::invalid_argument("push_rate_sum_inhomogeneous: alpha > 0");
  for (double a : window_speeds) {
    if (!(a > 0.0))
      throw std::invalid_argument("push_rate_sum_inhomogeneous: speeds must be positive");
    if (!(alpha < p.R * a))
      throw std::invalid_argument("push_rate_sum_inhomogeneous: need alpha < R a_i");
  }
  // Tagged particle at the right end of the window; pushes arrive from
  // particles j behind it, each attenuated by prod E q^{gap_m} with
  // gap_m ~ qGeo(alpha / (R a_m)).
  double acc = 0.0;
  double chain = 1.0;
  for (auto it = window_speeds.rbegin(); it != window_speeds.rend(); ++it) {
    acc += p.L / *it * chain;
    chain *= 1.0 - alpha / (p.R * *it);
  }
  return acc;
}

namespace {

std::vector<double> qgeo_vector(const Params& p, double alpha, int K) {
  QGeoLaw law{alpha / p.R, p.q};
  std::vector<double> pi(static_cast<std::size_t>(K + 1));
  for (int k = 0; k <= K; ++k) pi[static_cast<std::size_t>(k)] = qgeo_pmf(law, k);
  return pi;
}

}  // namespace

double gap_chain_stationarity_residual(const Params& p, double alpha, int K) {
  p.validate();
  if (K < 20) throw std::invalid_argument("gap_chain_stationarity_residual: K must be >= 20");
  if (!(alpha > 0.0 && alpha < p.R))
    throw std::invalid_argument("gap_chain_stationarity_residual: need 0 < alpha < R");

  const auto pi = qgeo_vector(p, alpha, K);
  const double up = p.L;
  auto down = [&](int k) { return p.L * p.R / alpha * (1.0 - qpow(p.q, k)); };

  // (pi Q)(k) = pi(k-1) up + pi(k+1) down(k+1) - pi(k)(up + down(k));
  // the truncation boundary k = K is excluded.
  double resid = 0.0;
  for (int k = 0; k < K; ++k) {
    double v = -pi[static_cast<std::size_t>(k)] * (up + down(k));
    if (k > 0) v += pi[static_cast<std::size_t>(k - 1)] * up;
    v += pi[static_cast<std::size_t>(k + 1)] * down(k + 1);
    resid = std::max(resid, std::abs(v));
  }
  return resid;
}

double gap_chain_detailed_balance_residual(const Params& p, double alpha, int K) {
  p.validate();
  const auto pi = qgeo_vector(p, alpha, K);
  double resid = 0.0;
  for (int k = 0; k < K; ++k) {
    const double lhs = p.L * pi[static_cast<std::size_t>(k)];
    const double rhs =
        p.L * p.R / alpha * (1.0 - qpow(p.q, k + 1)) * pi[static_cast<std::size_t>(k + 1)];
    resid = std::max(resid, std::abs(lhs - rhs));
  }
  return resid;
}

GapChainSimReport gap_chain_simulation_check(const Params& p, double alpha,
                                             std::int64_t samples, double spacing,
                                             std::uint64_t seed) {
  p.validate();
  if (samples < 100)
    throw std::invalid_argument("gap_chain_simulation_check: need >= 100 samples");
  if (!(spacing > 0.0))
    throw std::invalid_argument("gap_chain_simulation_check: spacing must be positive");

  auto rng = make_stream(seed, 0);
  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double up = p.L;
  auto down = [&](std::int64_t k) {
    return p.L * p.R / alpha * (1.0 - qpow(p.q, k));
  };

  std::int64_t state = 0;
  double clock = 0.0;
  double next_sample = 50.0 * spacing;  // burn-in before the first record
  std::int64_t collected = 0;
  std::vector<std::int64_t> counts;

  // Gillespie walk; the state is recorded at equally spaced times.
  while (collected < samples) {
    const double rate = up + down(state);
    const double target = clock + exp1(rng) / rate;
    while (next_sample <= target && collected < samples) {
      if (static_cast<std::size_t>(state) >= counts.size())
        counts.resize(static_cast<std::size_t>(state) + 1, 0);
      counts[static_cast<std::size_t>(state)] += 1;
      ++collected;
      next_sample += spacing;
    }
    clock = target;
    if (unif(rng) * rate < up)
      state += 1;
    else
      state -= 1;
    if (state < 0) state = 0;  // down(0) = 0, unreachable; guard anyway
  }

  // Bin tail states together so expected counts stay above ~5.
  QGeoLaw law{alpha / p.R, p.q};
  const double total = static_cast<double>(samples);
  std::vector<double> expected;
  std::vector<double> observed;
  double tail_exp = total;
  double tail_obs = total;
  for (std::size_t k = 0; k < counts.size() + 8; ++k) {
    const double e = total * qgeo_pmf(law, static_cast<int>(k));
    if (e < 5.0) break;
    const double o = k < counts.size() ? static_cast<double>(counts[k]) : 0.0;
    expected.push_back(e);
    observed.push_back(o);
    tail_exp -= e;
    tail_obs -= o;
  }
  if (tail_exp > 0.5) {
    expected.push_back(tail_exp);
    observed.push_back(std::max(0.0, tail_obs));
  }

  double stat = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  GapChainSimReport rep;
  rep.chi_square = stat;
  rep.dof = static_cast<int>(expected.size()) - 1;
  rep.p_value = chi_square_pvalue(stat, rep.dof);
  rep.samples = samples;
  return rep;
}

}  // namespace qpush
