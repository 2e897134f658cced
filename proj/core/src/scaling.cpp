#include "qpush/scaling.hpp"

#include <cmath>
#include <stdexcept>

#include "qpush/parallel.hpp"
#include "qpush/rng.hpp"
#include "qpush/stats.hpp"

namespace qpush {

void ScalingParams::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("ScalingParams: eps must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("ScalingParams: dt must be positive");
  if (sa.empty()) throw std::invalid_argument("ScalingParams: sa must be nonempty");
}

Params ScalingParams::lattice_params() const {
  validate();
  Params p;
  p.q = std::exp(-eps);
  p.R = std::exp(-eps * r);
  p.L = std::exp(-eps * l);
  p.a.resize(sa.size());
  for (std::size_t i = 0; i < sa.size(); ++i) p.a[i] = std::exp(-eps * sa[i]);
  p.validate();
  return p;
}

double sde_drift(int k, double G_k, double G_km1, const ScalingParams& sp) {
  if (k < 1 || k > sp.N()) throw std::invalid_argument("sde_drift: level out of range");
  if (k == 1) G_km1 = 0.0;  // G^{(0)}_0 == 0
  return -2.0 * sp.sa[static_cast<std::size_t>(k - 1)] + sp.l - sp.r -
         std::exp(G_k - G_km1);
}

double sde_diffusion() { return std::sqrt(2.0); }

namespace {

// One Euler-Maruyama path of the full hierarchy; writes G(tau_end) into `g`.
void em_path(const ScalingParams& sp, double tau_end, std::mt19937_64& rng,
             std::vector<double>& g, bool drop_interaction) {
  const int N = sp.N();
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sq2 = sde_diffusion();
  const std::int64_t nsteps = static_cast<std::int64_t>(std::ceil(tau_end / sp.dt));
  std::vector<double> next(static_cast<std::size_t>(N));
  for (std::int64_t s = 0; s < nsteps; ++s) {
    const double dt = std::min(sp.dt, tau_end - static_cast<double>(s) * sp.dt);
    const double sqdt = std::sqrt(dt);
    for (int k = 1; k <= N; ++k) {
      const double gk = g[static_cast<std::size_t>(k - 1)];
      const double gkm1 = k == 1 ? 0.0 : g[static_cast<std::size_t>(k - 2)];
      double drift = -2.0 * sp.sa[static_cast<std::size_t>(k - 1)] + sp.l - sp.r;
      if (!drop_interaction) drift -= std::exp(gk - gkm1);
      next[static_cast<std::size_t>(k - 1)] = gk + drift * dt + sq2 * sqdt * gauss(rng);
    }
    g = next;
  }
}

}  // namespace

SdePathStats simulate_sde_hierarchy(const ScalingParams& sp, double tau_end,
                                    std::int64_t npaths, std::uint64_t seed,
                                    const std::vector<double>& g0,
                                    bool drop_interaction) {
  sp.validate();
  if (!(tau_end > 0.0)) throw std::invalid_argument("simulate_sde_hierarchy: tau_end > 0");
  if (npaths < 1) throw std::invalid_argument("simulate_sde_hierarchy: npaths >= 1");
  const int N = sp.N();
  if (!g0.empty() && static_cast<int>(g0.size()) != N)
    throw std::invalid_argument("simulate_sde_hierarchy: g0 size mismatch");

  const int nchunks = 64;
  std::vector<std::vector<Welford>> partial(
      static_cast<std::size_t>(nchunks),
      std::vector<Welford>(static_cast<std::size_t>(N)));
  parallel_for_chunks(nchunks, 0, [&](int c) {
    const std::int64_t lo = npaths * c / nchunks;
    const std::int64_t hi = npaths * (c + 1) / nchunks;
    std::vector<double> g(static_cast<std::size_t>(N));
    for (std::int64_t idx = lo; idx < hi; ++idx) {
      auto rng = make_stream(seed, static_cast<std::uint64_t>(idx));
      if (g0.empty())
        std::fill(g.begin(), g.end(), 0.0);
      else
        g = g0;
      em_path(sp, tau_end, rng, g, drop_interaction);
      for (int k = 0; k < N; ++k)
        partial[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)].add(
            g[static_cast<std::size_t>(k)]);
    }
  });
  std::vector<Welford> acc(static_cast<std::size_t>(N));
  for (int c = 0; c < nchunks; ++c)
    for (int k = 0; k < N; ++k)
      acc[static_cast<std::size_t>(k)].merge(
          partial[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)]);

  SdePathStats out;
  out.npaths = npaths;
  for (int k = 0; k < N; ++k) {
    out.mean.push_back(acc[static_cast<std::size_t>(k)].mean);
    out.stderr_.push_back(acc[static_cast<std::size_t>(k)].stderr_of_mean());
  }
  return out;
}

double em_coupled_step_error(const ScalingParams& sp, double tau_end,
                             std::int64_t npaths, std::uint64_t seed) {
  sp.validate();
  const int N = sp.N();
  const std::int64_t nsteps = static_cast<std::int64_t>(std::round(tau_end / sp.dt));
  if (nsteps < 1) throw std::invalid_argument("em_coupled_step_error: tau_end < dt");

  Welford acc;
  for (std::int64_t idx = 0; idx < npaths; ++idx) {
    auto rng = make_stream(seed, static_cast<std::uint64_t>(idx));
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Fine increments over steps of dt/2; the coarse path uses their sums,
    // so both discretizations ride the same Brownian motion.
    std::vector<double> g_coarse(static_cast<std::size_t>(N), 0.0);
    std::vector<double> g_fine(static_cast<std::size_t>(N), 0.0);
    std::vector<double> dw1(static_cast<std::size_t>(N)), dw2(static_cast<std::size_t>(N));
    const double sq2 = sde_diffusion();
    const double h = sp.dt, hf = 0.5 * sp.dt;
    const double sq_hf = std::sqrt(hf);
    auto step = [&](std::vector<double>& g, double dtau, const std::vector<double>& dw) {
      std::vector<double> next(g.size());
      for (int k = 1; k <= N; ++k) {
        const double gk = g[static_cast<std::size_t>(k - 1)];
        const double gkm1 = k == 1 ? 0.0 : g[static_cast<std::size_t>(k - 2)];
        next[static_cast<std::size_t>(k - 1)] =
            gk + sde_drift(k, gk, gkm1, sp) * dtau +
            sq2 * dw[static_cast<std::size_t>(k - 1)];
      }
      g = next;
    };
    for (std::int64_t s = 0; s < nsteps; ++s) {
      for (int k = 0; k < N; ++k) {
        dw1[static_cast<std::size_t>(k)] = sq_hf * gauss(rng);
        dw2[static_cast<std::size_t>(k)] = sq_hf * gauss(rng);
      }
      step(g_fine, hf, dw1);
      step(g_fine, hf, dw2);
      std::vector<double> dw(static_cast<std::size_t>(N));
      for (int k = 0; k < N; ++k)
        dw[static_cast<std::size_t>(k)] =
            dw1[static_cast<std::size_t>(k)] + dw2[static_cast<std::size_t>(k)];
      step(g_coarse, h, dw);
    }
    acc.add(std::abs(g_coarse[0] - g_fine[0]));
  }
  return acc.mean;
}

RescaleReport rescale_pushasep(const ScalingParams& sp, double tau, std::int64_t npaths,
                               std::uint64_t seed, double event_budget) {
  sp.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("rescale_pushasep: tau must be positive");
  const Params p = sp.lattice_params();
  const int N = p.N();
  const double t = tau / (sp.eps * sp.eps);

  double rate_bound = 0.0;
  for (int i = 0; i < N; ++i)
    rate_bound += p.R * p.a[static_cast<std::size_t>(i)] + p.L / p.a[static_cast<std::size_t>(i)];
  if (rate_bound * t * static_cast<double>(npaths) > event_budget)
    throw std::invalid_argument("rescale_pushasep: simulation budget exceeded");

  // Lattice side: G_k = eps lambda^{(k)}_k - (k-1) log eps with C = 0.
  const int nchunks = 64;
  std::vector<std::vector<Welford>> partial(
      static_cast<std::size_t>(nchunks),
      std::vector<Welford>(static_cast<std::size_t>(N)));
  const ParticleConfig init = ParticleConfig::step(N);
  parallel_for_chunks(nchunks, 0, [&](int c) {
    const std::int64_t lo = npaths * c / nchunks;
    const std::int64_t hi = npaths * (c + 1) / nchunks;
    for (std::int64_t idx = lo; idx < hi; ++idx) {
      auto rng = make_stream(seed, static_cast<std::uint64_t>(idx));
      const ParticleConfig end = sample_pushasep(p, init, t, rng);
      for (int k = 1; k <= N; ++k) {
        const double lam = static_cast<double>(end.x[static_cast<std::size_t>(k - 1)] + k);
        const double g = sp.eps * lam - (k - 1) * std::log(sp.eps);
        partial[static_cast<std::size_t>(c)][static_cast<std::size_t>(k - 1)].add(g);
      }
    }
  });
  std::vector<Welford> acc(static_cast<std::size_t>(N));
  for (int c = 0; c < nchunks; ++c)
    for (int k = 0; k < N; ++k)
      acc[static_cast<std::size_t>(k)].merge(
          partial[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)]);

  // SDE side started from the packed-state image.
  std::vector<double> g0(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k)
    g0[static_cast<std::size_t>(k - 1)] = -(k - 1) * std::log(sp.eps);
  const SdePathStats sde = simulate_sde_hierarchy(sp, tau, npaths, seed ^ 0x5DEEC5DEULL, g0);

  RescaleReport rep;
  rep.tau = tau;
  rep.eps = sp.eps;
  for (int k = 0; k < N; ++k) {
    rep.lattice_mean.push_back(acc[static_cast<std::size_t>(k)].mean);
    rep.lattice_stderr.push_back(acc[static_cast<std::size_t>(k)].stderr_of_mean());
  }
  rep.sde_mean = sde.mean;
  rep.sde_stderr = sde.stderr_;
  rep.level1_discrepancy = std::abs(rep.lattice_mean[0] - rep.sde_mean[0]);
  return rep;
}

double rate_expansion_remainder(double eps, double sa_k, double r, double delta_G) {
  // Finite-eps right-jump rate of a leftmost particle with gap
  // lambda^{(k-1)}_{k-1} - lambda^{(k)}_k = -eps^{-1} log eps + eps^{-1} (-delta_G):
  // R a_k (1 - q^{gap}) = e^{-eps(r + sa_k)} (1 - eps e^{delta_G}).
  const double rate = std::exp(-eps * (r + sa_k)) * (1.0 - eps * std::exp(delta_G));
  const double expansion = 1.0 - eps * (sa_k + r + std::exp(delta_G));
  return std::abs(rate - expansion);
}

}  // namespace qpush
