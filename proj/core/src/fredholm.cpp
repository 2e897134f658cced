#include "qpush/fredholm.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "qpush/evolve.hpp"
#include "qpush/qfunctions.hpp"

namespace qpush {

namespace {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846264338327950288;

bool on_positive_real_axis(cplx z) { return z.imag() == 0.0 && z.real() > 0.0; }

}  // namespace

void KernelSpec::validate() const {
  params.validate();
  if (n < 1 || n > params.N())
    throw std::invalid_argument("KernelSpec: particle index out of range");
  if (t < 0.0) throw std::invalid_argument("KernelSpec: t must be >= 0");
  if (on_positive_real_axis(zeta))
    throw std::invalid_argument("KernelSpec: zeta must avoid the positive real axis");
  if (mb_points < 16) throw std::invalid_argument("KernelSpec: mb_points too small");
  if (nystrom_points < 8) throw std::invalid_argument("KernelSpec: nystrom_points too small");
  const double r = radius();
  const double rq = std::sqrt(params.q);
  if (!(rq * (1.0 + r) < 1.0 - r))
    throw std::invalid_argument(
        "KernelSpec: c1_radius too large, sqrt(q) (1 + r) < 1 - r is required");
}

double KernelSpec::radius() const {
  if (c1_radius > 0.0) return c1_radius;
  const double rq = std::sqrt(params.q);
  return 0.5 * (1.0 - rq) / (1.0 + rq);
}

double KernelSpec::truncation() const {
  if (mb_truncation > 0.0) return mb_truncation;
  // Tail of the integrand decays like exp(-(pi - |arg(-zeta)|) |Im s|).
  double delta = kPi;
  if (zeta != cplx{0.0, 0.0}) delta = kPi - std::abs(std::arg(-zeta));
  if (delta < 0.05)
    throw std::invalid_argument("KernelSpec: zeta too close to the positive real axis");
  return 37.0 / delta;
}

namespace {

// pi / sin(-pi s) * (-zeta)^s * G(q^s w)/G(w) with
// G(w) = (w;q)_inf^n Pi_t(w); evaluated with the principal branch of
// log(-zeta).  The Pochhammer-power ratio is exp(n * sum log factor-ratios),
// exact for integer n regardless of branch picks.
cplx mb_integrand(const KernelSpec& spec, cplx s, cplx w) {
  const double q = spec.params.q;
  const cplx qs = std::exp(s * std::log(q));
  const cplx qsw = qs * w;

  cplx log_ratio{0.0, 0.0};
  {
    // sum of log((1 - q^i qsw)/(1 - q^i w)) until both factors are ~1
    const double tol = 1e-17;
    double mag = std::max(std::abs(qsw), std::abs(w));
    cplx nq = qsw, dq = w;
    while (mag > tol) {
      log_ratio += std::log((1.0 - nq) / (1.0 - dq));
      nq *= q;
      dq *= q;
      mag *= q;
    }
  }
  const cplx poch_pow = std::exp(static_cast<double>(spec.n) * log_ratio);

  const double R = spec.params.R, L = spec.params.L;
  const cplx pi_ratio = std::exp(spec.t * (R * (qsw - w) + L * (1.0 / qsw - 1.0 / w)));

  const cplx zeta_pow = std::exp(s * std::log(-spec.zeta));
  const cplx sine = std::sin(-kPi * s);
  return kPi / sine * zeta_pow * poch_pow * pi_ratio;
}

}  // namespace

std::complex<double> kernel_eval(const KernelSpec& spec, cplx w, cplx wp) {
  spec.validate();
  if (spec.zeta == cplx{0.0, 0.0}) return {0.0, 0.0};

  const double T = spec.truncation();
  const int M = spec.mb_points;
  const double h = 2.0 * T / M;
  // (1/2 pi i) \int f(s) ds over s = 1/2 + i v = (1/2 pi) \int f dv.
  cplx acc{0.0, 0.0};
  for (int m = 0; m <= M; ++m) {
    const double v = -T + h * m;
    const cplx s{0.5, v};
    const double trap = (m == 0 || m == M) ? 0.5 : 1.0;
    const cplx qs = std::exp(s * std::log(spec.params.q));
    acc += trap * mb_integrand(spec, s, w) / (qs * w - wp);
  }
  return acc * h / (2.0 * kPi);
}

std::complex<double> fredholm_det(const KernelSpec& spec) {
  spec.validate();
  if (spec.zeta == cplx{0.0, 0.0}) return {1.0, 0.0};

  const int P = spec.nystrom_points;
  const double r = spec.radius();
  std::vector<cplx> w(static_cast<std::size_t>(P)), wt(static_cast<std::size_t>(P));
  for (int j = 0; j < P; ++j) {
    const double th = 2.0 * kPi * j / P;
    const cplx e{std::cos(th), std::sin(th)};
    w[static_cast<std::size_t>(j)] = 1.0 + r * e;
    wt[static_cast<std::size_t>(j)] = r * e / static_cast<double>(P);  // dw/(2 pi i)
  }

  // The s-dependent part of the kernel factorizes from 1/(q^s w - w'):
  // precompute it per (s, w) node.
  const double T = spec.truncation();
  const int M = spec.mb_points;
  const double h = 2.0 * T / M;

  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(P, P);
  std::vector<cplx> qs_line(static_cast<std::size_t>(M + 1));
  std::vector<cplx> pref(static_cast<std::size_t>(M + 1));
  for (int m = 0; m <= M; ++m) {
    const cplx s{0.5, -T + h * m};
    qs_line[static_cast<std::size_t>(m)] = std::exp(s * std::log(spec.params.q));
  }
  for (int j = 0; j < P; ++j) {
    for (int m = 0; m <= M; ++m) {
      const cplx s{0.5, -T + h * m};
      const double trap = (m == 0 || m == M) ? 0.5 : 1.0;
      pref[static_cast<std::size_t>(m)] =
          trap * mb_integrand(spec, s, w[static_cast<std::size_t>(j)]);
    }
    for (int l = 0; l < P; ++l) {
      cplx acc{0.0, 0.0};
      for (int m = 0; m <= M; ++m)
        acc += pref[static_cast<std::size_t>(m)] /
               (qs_line[static_cast<std::size_t>(m)] * w[static_cast<std::size_t>(j)] -
                w[static_cast<std::size_t>(l)]);
      K(j, l) = acc * h / (2.0 * kPi) * wt[static_cast<std::size_t>(l)];
    }
  }

  const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(P, P) + K;
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(A).determinant();
}

std::complex<double> qlaplace_exact_n1(const Params& p, double t, cplx zeta,
                                       double tail_tol) {
  p.validate();
  if (t < 0.0) throw std::invalid_argument("qlaplace_exact_n1: t must be >= 0");
  if (on_positive_real_axis(zeta))
    throw std::invalid_argument("qlaplace_exact_n1: zeta must avoid the positive real axis");
  if (!(tail_tol > 0.0)) throw std::invalid_argument("qlaplace_exact_n1: tail_tol > 0");

  const double mu_r = p.R * p.a[0] * t;       // right-jump count mean
  const double mu_l = p.L / p.a[0] * t;       // left-jump count mean

  // Poisson pmfs truncated once the remaining tail is below tail_tol.
  auto pmf_upto = [&](double mu, std::vector<double>& out) {
    out.clear();
    double term = std::exp(-mu);
    double cum = term;
    out.push_back(term);
    for (int j = 1; j < 4000; ++j) {
      term *= mu / j;
      out.push_back(term);
      cum += term;
      if (1.0 - cum < tail_tol && term < tail_tol) break;
    }
  };
  std::vector<double> pr, pl;
  pmf_upto(mu_r, pr);
  pmf_upto(mu_l, pl);

  cplx acc{0.0, 0.0};
  for (std::size_t jr = 0; jr < pr.size(); ++jr)
    for (std::size_t jl = 0; jl < pl.size(); ++jl) {
      const double prob = pr[jr] * pl[jl];
      if (prob < tail_tol * 1e-3) continue;
      const std::int64_t m = static_cast<std::int64_t>(jr) - static_cast<std::int64_t>(jl);
      // 1/(zeta q^m; q)_inf as a product of reciprocals; underflows to 0
      // harmlessly for very negative m.
      const cplx arg = zeta * qpow(p.q, m);
      cplx recip{1.0, 0.0};
      const int depth = static_cast<int>(
          std::ceil(std::max(0.0, std::log(1e-17 / std::max(1e-300, std::abs(arg))) /
                                      std::log(p.q))));
      cplx aq = arg;
      for (int i = 0; i < depth; ++i) {
        recip /= (1.0 - aq);
        aq *= p.q;
      }
      acc += prob * recip;
    }
  return acc;
}

std::vector<DivergenceRow> divergence_demo(const Params& p, double t, int kmax,
                                           double abs_zeta, int n_index) {
  p.validate();
  if (n_index < 1 || n_index > p.N())
    throw std::invalid_argument("divergence_demo: particle index out of range");
  if (kmax < 0) throw std::invalid_argument("divergence_demo: kmax must be >= 0");

  std::vector<DivergenceRow> rows;
  rows.push_back({0, 1.0, 1.0});
  for (int k = 1; k <= kmax; ++k) {
    const MultiIndex n(static_cast<std::size_t>(k), n_index);
    const double mom = exact_moment(p, n, t);
    const double term = std::pow(abs_zeta, k) * mom / std::abs(qq_factorial(p.q, k));
    rows.push_back({k, mom, term});
  }
  return rows;
}

}  // namespace qpush
