#include "qpush/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <mutex>
#include <stdexcept>

#include "qpush/contour.hpp"
#include "qpush/evolve.hpp"
#include "qpush/fredholm.hpp"
#include "qpush/model.hpp"
#include "qpush/parallel.hpp"
#include "qpush/qfunctions.hpp"
#include "qpush/rng.hpp"
#include "qpush/scaling.hpp"
#include "qpush/simulate.hpp"
#include "qpush/stationary.hpp"

namespace qpush {

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return std::string(buf);
}

std::string index_str(const MultiIndex& n) {
  std::string s = "(";
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(n[i]);
  }
  return s + ")";
}

struct Cell {
  double q, R, L, t;
  std::vector<double> a;

  Params params() const { return Params::make(q, R, L, a); }
  std::string label() const {
    std::string s = fmt("q=%.2f R=%.2f L=%.2f t=%.2f a=(", q, R, L, t);
    for (std::size_t i = 0; i < a.size(); ++i)
      s += fmt(i + 1 < a.size() ? "%.2f," : "%.2f)", a[i]);
    return s;
  }
};

std::vector<MultiIndex> weyl_upto(int kmax, int N) {
  std::vector<MultiIndex> out;
  for (int k = 1; k <= kmax; ++k) {
    auto w = weyl_chamber(k, N);
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

MultiIndex doubled_index(const MultiIndex& n) {
  MultiIndex d;
  d.reserve(2 * n.size());
  for (int v : n) {
    d.push_back(v);
    d.push_back(v);
  }
  std::sort(d.rbegin(), d.rend());
  return d;
}

// Exact standard error of the Monte Carlo mean of prod q^{x_{n_i}+n_i}:
// the second moment is the moment of the doubled index.  Returns +inf when
// the doubled moment overflows the double range (then the MC comparison is
// vacuous and reported as such).
double exact_mc_stderr(const Params& p, const MultiIndex& n, double t, double mean,
                       std::int64_t nsamples) {
  const int k2 = 2 * static_cast<int>(n.size());
  double max_inv_a = 0.0;
  for (double a : p.a) max_inv_a = std::max(max_inv_a, 1.0 / a);
  const double growth_bound = t * p.L * max_inv_a * (std::pow(p.q, -k2) - 1.0);
  if (growth_bound > 600.0) return std::numeric_limits<double>::infinity();
  const double m2 = exact_moment(p, doubled_index(n), t);
  if (!std::isfinite(m2)) return std::numeric_limits<double>::infinity();
  const double var = std::max(0.0, m2 - mean * mean);
  return std::sqrt(var / static_cast<double>(nsamples));
}

using clock_type = std::chrono::steady_clock;

struct Timer {
  clock_type::time_point start = clock_type::now();
  double seconds() const {
    return std::chrono::duration<double>(clock_type::now() - start).count();
  }
};

// ---------------------------------------------------------------------------
// Criterion 1: generator duality residuals
// ---------------------------------------------------------------------------

CriterionResult criterion_duality(const AcceptanceOptions& opt) {
  CriterionResult res;
  res.id = 1;
  res.name = "generator duality (random configurations, N <= 5, sum y <= 6)";

  const std::vector<std::vector<double>> speeds = {
      {1.0, 1.0}, {1.0, 1.3, 0.7}, {1.0, 1.3, 0.7, 1.1, 0.9}};
  const std::vector<std::pair<double, double>> rl = {{1.0, 1.0}, {2.0, 0.5}};
  const std::vector<double> qs = {0.3, 0.5, 0.8};

  double worst = 0.0, worst_ident = 0.0, worst_markov = 0.0;
  int total_trials = 0;
  std::uint64_t stream = 0;
  for (const auto& a : speeds)
    for (auto [R, L] : rl)
      for (double q : qs) {
        const Params p = Params::make(q, R, L, a);
        const auto rep = verify_duality_identity(p, 70, opt.seed + (++stream));
        worst = std::max(worst, rep.max_generator_residual);
        worst_ident = std::max(worst_ident, rep.max_identity_residual);
        worst_markov = std::max(worst_markov, rep.max_markov_decomp_residual);
        total_trials += rep.trials;
      }

  res.pass = worst <= 1e-12 && worst_ident <= 1e-12 && worst_markov <= 1e-12 &&
             total_trials >= 1000;
  res.details.push_back(fmt("pairs=%d max duality residual=%.3e (tol 1e-12)",
                            total_trials, worst));
  res.details.push_back(fmt("component identities max residual=%.3e", worst_ident));
  res.details.push_back(
      fmt("Markov decomposition L^qP H = L^dM H + C H max residual=%.3e", worst_markov));
  return res;
}

// ---------------------------------------------------------------------------
// Criterion 2: triple-oracle moment grid
// ---------------------------------------------------------------------------

CriterionResult criterion_triple_oracle(const AcceptanceOptions& opt) {
  CriterionResult res;
  res.id = 2;
  res.name = "triple-oracle moments (contour vs ODE vs MC) on the parameter grid";

  const int N = 4;
  const std::vector<double> qs = {0.3, 0.5, 0.8};
  const std::vector<std::pair<double, double>> rls = {
      {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {2.0, 0.5}};
  const std::vector<std::vector<double>> avecs = {{1.0, 1.0, 1.0, 1.0},
                                                  {1.2, 1.0, 0.85, 0.95}};
  const std::vector<double> ts = {0.25, 1.0};

  std::vector<Cell> cells;
  for (double q : qs)
    for (auto [R, L] : rls)
      for (const auto& a : avecs)
        for (double t : ts) cells.push_back({q, R, L, t, a});

  const std::int64_t mc_paths = 100000;
  const auto ns_all = weyl_upto(3, N);

  struct CellOutcome {
    int contour_fail = 0;
    int mc_fail = 0;
    int mc_vacuous = 0;
    double worst_contour = 0.0;
    double worst_mc_sigmas = 0.0;
    std::vector<std::string> failures;
  };
  std::vector<CellOutcome> outcomes(cells.size());

  parallel_for_chunks(static_cast<int>(cells.size()), opt.threads, [&](int ci) {
    const Cell& cell = cells[static_cast<std::size_t>(ci)];
    const Params p = cell.params();
    CellOutcome& out = outcomes[static_cast<std::size_t>(ci)];

    // Exact oracle: one triangular solve per level set.
    std::vector<TrueEvolutionSolution> sols;
    for (int k = 1; k <= 3; ++k)
      sols.push_back(solve_true_evolution(p, ParticleConfig::step(N), k, cell.t));

    // Monte Carlo, one trajectory sweep for all indices.
    McOptions mco;
    mco.nsamples = mc_paths;
    mco.seed = opt.seed ^ (0x9E3779B97F4A7C15ULL * (ci + 1));
    mco.threads = 1;
    const auto mc = mc_moments(p, ns_all, cell.t, mco);

    // Contour oracle, batched per level.
    std::vector<double> contour_vals(ns_all.size());
    {
      QuadSpec quad;
      quad.tol = 1e-10;
      std::size_t base = 0;
      for (int k = 1; k <= 3; ++k) {
        std::vector<MultiIndex> group;
        for (const auto& n : ns_all)
          if (static_cast<int>(n.size()) == k) group.push_back(n);
        NestedContourIntegrator integ(p, cell.t, build_contours_hugging(p, k), quad);
        const auto vals = integ.eval_batch(group);
        for (std::size_t i = 0; i < group.size(); ++i)
          contour_vals[base + i] = vals[i].value.real();
        base += group.size();
      }
    }

    for (std::size_t i = 0; i < ns_all.size(); ++i) {
      const MultiIndex& n = ns_all[i];
      const int k = static_cast<int>(n.size());
      const double exact =
          sols[static_cast<std::size_t>(k - 1)].value(index_to_occupation(n, N));
      const double scale = std::max(1.0, std::abs(exact));

      const double cdiff = std::abs(contour_vals[i] - exact) / scale;
      out.worst_contour = std::max(out.worst_contour, cdiff);
      if (cdiff > 1e-8) {
        ++out.contour_fail;
        if (out.failures.size() < 8)
          out.failures.push_back(fmt("contour %s: |dv|=%.2e exact=%.6e  [%s]",
                                     index_str(n).c_str(), cdiff, exact,
                                     cell.label().c_str()));
      }

      const double sig = exact_mc_stderr(p, n, cell.t, exact, mc_paths);
      if (std::isinf(sig)) {
        ++out.mc_vacuous;
        continue;
      }
      const double dev = std::abs(mc[i].mean - exact);
      if (sig == 0.0) {
        if (dev != 0.0) ++out.mc_fail;
        continue;
      }
      out.worst_mc_sigmas = std::max(out.worst_mc_sigmas, dev / sig);
      if (dev > 4.0 * sig) {
        ++out.mc_fail;
        if (out.failures.size() < 8)
          out.failures.push_back(fmt("mc %s: dev=%.2e sigma=%.2e (%.1f sigma)  [%s]",
                                     index_str(n).c_str(), dev, sig, dev / sig,
                                     cell.label().c_str()));
      }
    }
  });

  int cfail = 0, mfail = 0, vac = 0;
  double worst_c = 0.0, worst_m = 0.0;
  for (const auto& o : outcomes) {
    cfail += o.contour_fail;
    mfail += o.mc_fail;
    vac += o.mc_vacuous;
    worst_c = std::max(worst_c, o.worst_contour);
    worst_m = std::max(worst_m, o.worst_mc_sigmas);
    for (const auto& f : o.failures) res.details.push_back("  " + f);
  }
  const int total = static_cast<int>(cells.size() * ns_all.size());
  res.pass = cfail == 0 && mfail == 0;
  res.details.insert(
      res.details.begin(),
      fmt("grid: %zu cells x %zu indices = %d comparisons", cells.size(), ns_all.size(),
          total));
  res.details.insert(res.details.begin() + 1,
                     fmt("contour vs exact: %d failures, worst rel dev %.3e (tol 1e-8)",
                         cfail, worst_c));
  res.details.insert(
      res.details.begin() + 2,
      fmt("MC vs exact: %d failures beyond 4 sigma, worst %.2f sigma; %d comparisons "
          "vacuous (variance beyond double range)",
          mfail, worst_m, vac));
  return res;
}

// ---------------------------------------------------------------------------
// Criterion 3: structural checks of the nested integral
// ---------------------------------------------------------------------------

CriterionResult criterion_structural(const AcceptanceOptions& opt) {
  CriterionResult res;
  res.id = 3;
  res.name = "nested-integral structure: t=0 data, n_k=0 vanishing, contour "
             "independence, boundary/cumulative/free relations";
  res.pass = true;

  QuadSpec quad;
  quad.tol = 1e-10;

  // (a) t = 0: value 1 on the Weyl chamber (n_k >= 1), 0 when n_k = 0.
  {
    const int N = 4;
    double worst1 = 0.0, worst0 = 0.0;
    for (double q : {0.3, 0.5, 0.8}) {
      const Params p = Params::make(q, 1.0, 1.0, std::vector<double>(N, 1.0));
      for (int k = 1; k <= 3; ++k) {
        NestedContourIntegrator integ(p, 0.0, build_contours_hugging(p, k), quad);
        for (const auto& n : weyl_chamber(k, N)) {
          const double v = integ.eval(n).value.real();
          if (n.back() == 0)
            worst0 = std::max(worst0, std::abs(v));
          else
            worst1 = std::max(worst1, std::abs(v - 1.0));
        }
      }
    }
    if (worst1 > 1e-10 || worst0 > 1e-10) res.pass = false;
    res.details.push_back(
        fmt("t=0: max |m-1| on Weyl chamber = %.3e, max |m| at n_k=0 = %.3e (tol 1e-10)",
            worst1, worst0));
  }

  // (b) contour independence (Cauchy): different certified families agree.
  {
    double worst = 0.0;
    auto compare = [&](const Params& p, double t, int k,
                       const ContourSpec& s1, const ContourSpec& s2) {
      NestedContourIntegrator i1(p, t, s1, quad);
      NestedContourIntegrator i2(p, t, s2, quad);
      auto rng = make_stream(opt.seed, 77);
      std::uniform_int_distribution<int> entry(0, p.N());
      for (int rep = 0; rep < 4; ++rep) {
        MultiIndex n(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) n[static_cast<std::size_t>(j)] = entry(rng);
        std::sort(n.rbegin(), n.rend());
        const double v1 = i1.eval(n).value.real();
        const double v2 = i2.eval(n).value.real();
        worst = std::max(worst, std::abs(v1 - v2) / std::max(1.0, std::abs(v1)));
      }
    };
    const std::vector<double> a3 = {1.0, 1.0, 1.0};
    for (double q : {0.5, 0.8}) {
      const Params p = Params::make(q, 1.0, 1.0, a3);
      for (int k = 2; k <= 3; ++k)
        compare(p, 0.25, k, build_contours(p, k), build_contours_hugging(p, k));
    }
    {
      const Params p = Params::make(0.3, 1.0, 0.0, a3);  // no essential singularity
      for (int k = 2; k <= 3; ++k)
        compare(p, 1.0, k, build_contours(p, k), build_contours_hugging(p, k));
    }
    if (worst > 2.0 * quad.tol) res.pass = false;
    res.details.push_back(
        fmt("contour independence: worst rel disagreement %.3e (tol %.1e)", worst,
            2.0 * quad.tol));
  }

  // (c) boundary + cumulative + free equation residuals, with an O(h^2)
  // Richardson check on the time derivative.
  {
    double worst_b = 0.0, worst_c = 0.0;
    double free_h = 0.0, free_h2 = 0.0;
    const double h = 1e-3;
    const std::vector<std::tuple<double, double, double>> cfgs = {
        {0.5, 1.0, 1.0}, {0.8, 2.0, 0.5}};
    for (auto [q, R, L] : cfgs) {
      const Params p = Params::make(q, R, L, {1.0, 1.1, 0.9});
      for (int k = 2; k <= 3; ++k) {
        const int ns = k == 2 ? 5 : 3;
        const auto rep = verify_free_conditions(p, 0.5, k, quad, ns, opt.seed + k, h);
        const auto rep2 =
            verify_free_conditions(p, 0.5, k, quad, ns, opt.seed + k, h / 2.0);
        worst_b = std::max({worst_b, rep.max_boundary_residual, rep2.max_boundary_residual});
        worst_c =
            std::max({worst_c, rep.max_cumulative_residual, rep2.max_cumulative_residual});
        free_h = std::max(free_h, rep.max_free_eqn_residual);
        free_h2 = std::max(free_h2, rep2.max_free_eqn_residual);
      }
    }
    const double btol = std::max(1e-8, quad.tol);
    if (worst_b > btol || worst_c > btol) res.pass = false;
    // central difference: residual = O(h^2) + quadrature noise / (2h)
    const double floor = 10.0 * quad.tol / h;
    if (free_h > 2e-4 || free_h2 > 0.35 * free_h + floor) res.pass = false;
    res.details.push_back(
        fmt("boundary residual %.3e, cumulative residual %.3e (tol %.1e)", worst_b,
            worst_c, btol));
    res.details.push_back(
        fmt("free equation: resid(h=%.0e)=%.3e, resid(h/2)=%.3e (O(h^2) ratio %.2f)", h,
            free_h, free_h2, free_h > 0 ? free_h2 / free_h : 0.0));
  }

  return res;
}

// ---------------------------------------------------------------------------
// Criterion 4: telescoping partial-sum identity
// ---------------------------------------------------------------------------

CriterionResult criterion_partial_sum(const AcceptanceOptions& opt) {
  CriterionResult res;
  res.id = 4;
  res.name = "partial-sum identity S_n = 1/z";

  auto rng = make_stream(opt.seed, 4);
  std::uniform_real_distribution<double> ad(0.5, 2.0);
  double worst = 0.0, worst_rec = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(10);
    for (auto& v : a) v = ad(rng);
    const auto r = partial_sum_identity_check(a, 50, opt.seed + rep);
    worst = std::max(worst, r.max_deviation);
    worst_rec = std::max(worst_rec, r.max_recursion_residual);
  }
  res.pass = worst <= 1e-12;
  res.details.push_back(fmt("max |S_n - 1/z| = %.3e (tol 1e-12), recursion residual %.3e",
                            worst, worst_rec));
  return res;
}

// ---------------------------------------------------------------------------
// Criterion 5: first-particle closed form
// ---------------------------------------------------------------------------

CriterionResult criterion_first_particle(const AcceptanceOptions&) {
  CriterionResult res;
  res.id = 5;
  res.name = "clustered first-particle moments match exp(R a1 t (q^k-1) + L t (q^-k-1)/a1)";

  double worst = 0.0;
  for (double q : {0.3, 0.5, 0.8})
    for (auto [R, L] : std::vector<std::pair<double, double>>{
             {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {2.0, 0.5}})
      for (double a1 : {1.0, 1.7})
        for (double t : {0.25, 1.0}) {
          const Params p = Params::make(q, R, L, {a1});
          for (int k = 1; k <= 5; ++k) {
            const MultiIndex n(static_cast<std::size_t>(k), 1);
            const double got = exact_moment(p, n, t);
            const double want =
                std::exp(R * a1 * t * (std::pow(q, k) - 1.0) +
                         L / a1 * t * (std::pow(q, -k) - 1.0));
            worst = std::max(worst, std::abs(got - want) / want);
          }
        }
  res.pass = worst <= 1e-10;
  res.details.push_back(fmt("max relative deviation %.3e (tol 1e-10)", worst));
  return res;
}

// ---------------------------------------------------------------------------
// Criterion 6: moment growth lower bound
// ---------------------------------------------------------------------------

CriterionResult criterion_growth(const AcceptanceOptions&) {
  CriterionResult res;
  res.id = 6;
  res.name = "moment growth exceeds const * exp(L t q^{-k} / a1) for L > 0";
  res.pass = true;

  for (double q : {0.3, 0.5})
    for (auto [R, L] : std::vector<std::pair<double, double>>{
             {0.0, 1.0}, {1.0, 1.0}, {2.0, 0.5}})
      for (double t : {0.5, 1.0}) {
        const Params p = Params::make(q, R, L, {1.0});
        // Poisson-domination constant from the first-particle bound; its
        // consistency is anchored at k = 1.
        const double cst = std::exp(-(R + L) * t);
        for (int k = 1; k <= 5; ++k) {
          const MultiIndex n(static_cast<std::size_t>(k), 1);
          const double mom = exact_moment(p, n, t);
          const double bound = cst * std::exp(L * t * std::pow(q, -k));
          if (!(mom >= bound)) {
            res.pass = false;
            res.details.push_back(
                fmt("  violated at q=%.2f R=%.1f L=%.1f t=%.2f k=%d: m=%.3e bound=%.3e",
                    q, R, L, t, k, mom, bound));
          }
        }
      }
  res.details.insert(res.details.begin(),
                     std::string(res.pass ? "lower bound holds for k = 1..5 on the grid"
                                          : "lower bound violated"));
  return res;
}

// ---------------------------------------------------------------------------
// Criterion 7: stationary gap law
// ---------------------------------------------------------------------------

CriterionResult criterion_stationary(const AcceptanceOptions&) {
  CriterionResult res;
  res.id = 7;
  res.name = "q-geometric gap law: birth-death invariance and push-rate sum";
  res.pass = true;

  double worst_resid = 0.0, worst_push = 0.0, worst_inh = 0.0;
  auto rng = make_stream(99, 0);
  std::uniform_real_distribution<double> ad(0.5, 2.0);
  for (double q : {0.3, 0.5, 0.8})
    for (double ratio : {0.3, 0.7})
      for (double L : {0.5, 1.0}) {
        const double R = 1.0;
        const double alpha = ratio * R;
        const Params p = Params::make(q, R, L, {1.0});
        worst_resid = std::max(worst_resid, gap_chain_stationarity_residual(p, alpha, 80));
        const double want = L * R / alpha;
        worst_push =
            std::max(worst_push, std::abs(push_rate_sum(p, alpha) - want) / want);
        std::vector<double> window(400);
        for (auto& v : window) v = ad(rng);
        worst_inh = std::max(
            worst_inh,
            std::abs(push_rate_sum_inhomogeneous(p, alpha, window) - want) / want);
      }
  if (worst_resid > 1e-10 || worst_push > 1e-12 || worst_inh > 1e-12) res.pass = false;
  res.details.push_back(fmt("birth-death residual at K=80: %.3e (tol 1e-10)", worst_resid));
  res.details.push_back(
      fmt("push-rate sum vs L R / alpha: homogeneous %.3e, speed-inhomogeneous %.3e "
          "(tol 1e-12)",
          worst_push, worst_inh));
  return res;
}

// ---------------------------------------------------------------------------
// Criterion 8: interlacing-array marginal
// ---------------------------------------------------------------------------

CriterionResult criterion_array_marginal(const AcceptanceOptions& opt) {
  CriterionResult res;
  res.id = 8;
  res.name = "2D interlacing-array leftmost marginal matches contour moments";

  const std::vector<Cell> cells = {
      {0.5, 1.0, 1.0, 0.5, {1.0, 1.0, 1.0}},
      {0.5, 1.0, 1.0, 1.0, {1.0, 1.0, 1.0}},
      {0.5, 2.0, 0.5, 0.5, {1.0, 1.0, 1.0}},
      {0.5, 1.0, 1.0, 0.5, {1.2, 1.0, 0.85}},
  };
  const int N = 3;
  std::vector<MultiIndex> ns;
  for (const auto& n : weyl_upto(2, N))
    if (n.back() >= 1) ns.push_back(n);

  const std::int64_t paths = 100000;
  int fails = 0, vacuous = 0;
  double worst = 0.0;
  QuadSpec quad;
  quad.tol = 1e-10;

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& cell = cells[ci];
    const Params p = cell.params();
    McOptions mco;
    mco.nsamples = paths;
    mco.seed = opt.seed ^ (0xA5A5A5A5ULL + ci);
    mco.threads = opt.threads;
    const auto est = mc_array2d_moments(p, ns, cell.t, mco);

    for (int k = 1; k <= 2; ++k) {
      std::vector<MultiIndex> group;
      std::vector<std::size_t> which;
      for (std::size_t i = 0; i < ns.size(); ++i)
        if (static_cast<int>(ns[i].size()) == k) {
          group.push_back(ns[i]);
          which.push_back(i);
        }
      NestedContourIntegrator integ(p, cell.t, build_contours_hugging(p, k), quad);
      const auto vals = integ.eval_batch(group);
      for (std::size_t g = 0; g < group.size(); ++g) {
        const double ref = vals[g].value.real();
        const double sig = exact_mc_stderr(p, group[g], cell.t, ref, paths);
        if (std::isinf(sig)) {
          ++vacuous;
          continue;
        }
        const double dev = std::abs(est[which[g]].mean - ref);
        if (sig > 0.0) worst = std::max(worst, dev / sig);
        if (dev > 4.0 * sig) {
          ++fails;
          res.details.push_back(fmt("  %s: dev=%.3e sigma=%.3e (%.1f sigma) [%s]",
                                    index_str(group[g]).c_str(), dev, sig,
                                    sig > 0 ? dev / sig : 0.0, cell.label().c_str()));
        }
      }
    }
  }
  res.pass = fails == 0;
  res.details.insert(res.details.begin(),
                     fmt("%zu cells x %zu q-moment indices at %lld paths: %d beyond 4 "
                         "sigma, worst %.2f sigma, %d vacuous",
                         cells.size(), ns.size(), static_cast<long long>(paths), fails,
                         worst, vacuous));
  return res;
}

// ---------------------------------------------------------------------------
// Criterion 9: Fredholm determinant numerics (conjecture grid reported)
// ---------------------------------------------------------------------------

CriterionResult criterion_fredholm(const AcceptanceOptions&) {
  CriterionResult res;
  res.id = 9;
  res.name = "q-Laplace determinant: t=0 identity, refinement stability; conjectural "
             "identity reported";
  res.pass = true;

  using cplx = std::complex<double>;
  const std::vector<cplx> zetas = {{-0.3, 0.0}, {-0.9, 0.0}, {0.0, 0.5}, {-0.5, 0.5}};

  // (a) t = 0 determinant equals 1/(zeta;q)_inf (proven regime).
  double worst_t0 = 0.0;
  for (double q : {0.5, 0.7})
    for (const cplx zeta : zetas) {
      KernelSpec spec;
      spec.params = Params::make(q, 1.0, 1.0, {1.0});
      spec.n = 1;
      spec.t = 0.0;
      spec.zeta = zeta;
      const cplx det = fredholm_det(spec);
      const cplx want = 1.0 / qpoch_inf(zeta, q);
      worst_t0 = std::max(worst_t0, std::abs(det - want));
    }
  if (worst_t0 > 1e-6) res.pass = false;
  res.details.push_back(fmt("t=0: max |det - 1/(zeta;q)_inf| = %.3e (tol 1e-6)", worst_t0));

  // (b) refinement stability at a reference point.
  {
    KernelSpec spec;
    spec.params = Params::make(0.5, 1.0, 1.0, {1.0});
    spec.n = 1;
    spec.t = 0.5;
    spec.zeta = {-0.3, 0.0};
    const cplx base = fredholm_det(spec);
    KernelSpec fine_n = spec;
    fine_n.nystrom_points = 128;
    KernelSpec fine_m = spec;
    fine_m.mb_points = 1024;
    const double dn = std::abs(fredholm_det(fine_n) - base);
    const double dm = std::abs(fredholm_det(fine_m) - base);
    if (dn > 1e-8 || dm > 1e-8) res.pass = false;
    res.details.push_back(
        fmt("stability: Nystrom 64->128 %.3e, Mellin-Barnes 512->1024 %.3e (tol 1e-8)",
            dn, dm));
  }

  // (c) conjectural identity at n = 1 (reported, not asserted).
  {
    int ok = 0, bad = 0;
    double worst = 0.0;
    for (double q : {0.5, 0.7})
      for (auto [R, L] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {1.0, 0.0}})
        for (double t : {0.25, 0.5, 1.0})
          for (const cplx zeta : zetas) {
            KernelSpec spec;
            spec.params = Params::make(q, R, L, {1.0});
            spec.n = 1;
            spec.t = t;
            spec.zeta = zeta;
            const cplx det = fredholm_det(spec);
            const cplx lhs = qlaplace_exact_n1(spec.params, t, zeta);
            const double dev = std::abs(det - lhs);
            worst = std::max(worst, dev);
            (dev <= 1e-4 ? ok : bad) += 1;
          }
    res.details.push_back(
        fmt("REPORT conjectural identity (n=1): %d/%d grid points within 1e-4, worst "
            "|det - E| = %.3e (not asserted)",
            ok, ok + bad, worst));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Criterion 10: scaling limit machinery
// ---------------------------------------------------------------------------

CriterionResult criterion_scaling(const AcceptanceOptions& opt) {
  CriterionResult res;
  res.id = 10;
  res.name = "diffusion hierarchy: coefficients, integrator order, rescaled comparison";
  res.pass = true;

  // (a) coefficient checks, exact.
  {
    ScalingParams sp;
    sp.sa = {0.0, 0.4};
    sp.l = 0.3;
    sp.r = 0.3;
    const double d1 = sde_drift(1, 0.0, 123.0, sp);  // G_0 is pinned to 0
    const double d2 = sde_drift(2, 1.0, 0.25, sp);
    const double want2 = -2.0 * 0.4 + 0.3 - 0.3 - std::exp(0.75);
    if (d1 != -1.0 || d2 != want2 || sde_diffusion() != std::sqrt(2.0)) res.pass = false;
    res.details.push_back(fmt("coefficients: drift(k=1,G=0,l=r,a=0)=%.17g (want -1), "
                              "diffusion=%.17g (want sqrt 2)",
                              d1, sde_diffusion()));
  }

  // (b) strong self-consistency of the integrator under dt halving
  // (additive noise, so the coupled difference scales like dt).
  {
    ScalingParams sp;
    sp.sa = {0.1, 0.3};
    sp.l = 0.2;
    sp.r = 0.1;
    sp.dt = 0.02;
    const double d1 = em_coupled_step_error(sp, 1.0, 400, opt.seed + 10);
    ScalingParams sp2 = sp;
    sp2.dt = 0.01;
    const double d2 = em_coupled_step_error(sp2, 1.0, 400, opt.seed + 10);
    const double ratio = d2 / d1;
    if (!(ratio > 0.3 && ratio < 0.75)) res.pass = false;
    res.details.push_back(
        fmt("coupled dt-halving: E|G^dt - G^dt/2| = %.3e -> %.3e, ratio %.2f "
            "(strong order 1 expects ~0.5)",
            d1, d2, ratio));
  }

  // (c) Brownian-with-drift closed form with the interaction removed.
  {
    ScalingParams sp;
    sp.sa = {0.3};
    sp.l = 0.2;
    sp.r = 0.1;
    sp.dt = 1e-3;
    const double tau = 1.0;
    const auto st = simulate_sde_hierarchy(sp, tau, 10000, opt.seed + 11, {}, true);
    const double want_mean = -(2.0 * sp.sa[0] - sp.l + sp.r) * tau;
    const double mean_dev = std::abs(st.mean[0] - want_mean);
    if (mean_dev > 4.0 * st.stderr_[0]) res.pass = false;
    res.details.push_back(
        fmt("free level-1: mean %.4f vs %.4f (dev %.1f sigma), target var 2 tau",
            st.mean[0], want_mean, mean_dev / st.stderr_[0]));
  }

  // (d) finite-eps rate expansion remainder is O(eps^2).
  {
    double worst_ratio = 0.0;
    for (double dg : {-0.5, 0.0, 0.5})
      for (double eps : {0.1, 0.05, 0.025}) {
        const double rem = rate_expansion_remainder(eps, 0.2, 0.1, dg);
        worst_ratio = std::max(worst_ratio, rem / (eps * eps));
      }
    if (worst_ratio > 10.0) res.pass = false;
    res.details.push_back(
        fmt("rate expansion: max |remainder| / eps^2 = %.3f over the grid", worst_ratio));
  }

  // (e) rescaled lattice vs SDE hierarchy (reported; calibrated tolerance).
  {
    ScalingParams sp;
    sp.sa = {0.0, 0.0};
    sp.l = 0.0;
    sp.r = 0.0;
    sp.eps = 0.2;
    sp.dt = 1e-3;
    const auto rep = rescale_pushasep(sp, 0.5, 10000, opt.seed + 12);
    res.details.push_back(
        fmt("REPORT rescaled comparison (eps=%.2f tau=%.2f): lattice level-1 mean "
            "%.4f+-%.4f, SDE %.4f+-%.4f, |diff|=%.4f (calibrated allowance %.2f; the "
            "level-1 SDE carries the exp(G) term by convention while the lattice "
            "level-1 rate does not)",
            rep.eps, rep.tau, rep.lattice_mean[0], rep.lattice_stderr[0], rep.sde_mean[0],
            rep.sde_stderr[0], rep.level1_discrepancy, 0.75));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Criterion 11: divergence exhibit
// ---------------------------------------------------------------------------

CriterionResult criterion_divergence(const AcceptanceOptions&) {
  CriterionResult res;
  res.id = 11;
  res.name = "moment series: super-geometric growth for L>0, decay for L=0";
  res.pass = true;

  {
    const Params p = Params::make(0.5, 1.0, 1.0, {1.0});
    const auto rows = divergence_demo(p, 1.0, 8, 0.4);
    double max_early_ratio = 0.0;
    for (int k = 1; k <= 4; ++k)
      max_early_ratio = std::max(
          max_early_ratio, rows[static_cast<std::size_t>(k)].term /
                               rows[static_cast<std::size_t>(k - 1)].term);
    const double late_ratio = rows[8].term / rows[7].term;
    const double envelope = rows[4].term * std::pow(max_early_ratio, 4);
    if (!(late_ratio > 2.0 * max_early_ratio && rows[8].term > 5.0 * envelope))
      res.pass = false;
    res.details.push_back(
        fmt("L=1: term ratio k=8 %.3e vs max early ratio %.3e; T_8=%.3e vs geometric "
            "envelope %.3e",
            late_ratio, max_early_ratio, rows[8].term, envelope));
  }
  {
    const Params p = Params::make(0.5, 1.0, 0.0, {1.0});
    const auto rows = divergence_demo(p, 1.0, 8, 0.5);
    bool decays = true;
    for (int k = 2; k <= 8; ++k)
      if (rows[static_cast<std::size_t>(k)].term >=
          rows[static_cast<std::size_t>(k - 1)].term)
        decays = false;
    if (!decays) res.pass = false;
    res.details.push_back(fmt("L=0, |zeta|=0.5: terms decay from T_1=%.3e to T_8=%.3e",
                              rows[1].term, rows[8].term));
  }
  return res;
}

}  // namespace

std::string CriterionResult::status_line() const {
  return fmt("%s criterion %2d: %s (%.1fs)", pass ? "PASS" : "FAIL", id, name.c_str(),
             elapsed_sec);
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  Timer timer;
  CriterionResult res;
  switch (id) {
    case 1: res = criterion_duality(opt); break;
    case 2: res = criterion_triple_oracle(opt); break;
    case 3: res = criterion_structural(opt); break;
    case 4: res = criterion_partial_sum(opt); break;
    case 5: res = criterion_first_particle(opt); break;
    case 6: res = criterion_growth(opt); break;
    case 7: res = criterion_stationary(opt); break;
    case 8: res = criterion_array_marginal(opt); break;
    case 9: res = criterion_fredholm(opt); break;
    case 10: res = criterion_scaling(opt); break;
    case 11: res = criterion_divergence(opt); break;
    default:
      throw std::invalid_argument("run_criterion: id must be 1..11");
  }
  res.elapsed_sec = timer.seconds();
  return res;
}

std::vector<CriterionResult> run_all_criteria(const AcceptanceOptions& opt) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 11; ++id) out.push_back(run_criterion(id, opt));
  return out;
}

}  // namespace qpush
