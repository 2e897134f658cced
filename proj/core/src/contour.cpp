#include "qpush/contour.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "qpush/qfunctions.hpp"
#include "qpush/rng.hpp"

namespace qpush {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int pow2_ceil(int v) {
  int m = 1;
  while (m < v) m <<= 1;
  return m;
}

}  // namespace

ContourSpec::Certificate ContourSpec::certify(double q,
                                              const std::vector<double>& poles) const {
  Certificate cert;
  cert.contains_poles = true;
  cert.nested_q_scaled = true;
  cert.excludes_origin = true;
  for (const auto& c : circles) {
    if (!(c.radius > 0.0 && c.radius < c.center)) cert.excludes_origin = false;
    for (double a : poles)
      if (!(std::abs(a - c.center) < c.radius)) cert.contains_poles = false;
  }
  for (std::size_t A = 0; A < circles.size(); ++A)
    for (std::size_t B = A + 1; B < circles.size(); ++B) {
      const double sep = std::abs(circles[A].center - q * circles[B].center) +
                         q * circles[B].radius;
      if (!(sep < circles[A].radius)) cert.nested_q_scaled = false;
    }
  return cert;
}

void QuadSpec::validate() const {
  if (points < 16 || (points & (points - 1)) != 0)
    throw std::invalid_argument("QuadSpec: points must be a power of two >= 16");
  if (!(tol > 0.0)) throw std::invalid_argument("QuadSpec: tol must be positive");
  if (max_points < 2 * points)
    throw std::invalid_argument("QuadSpec: max_points must be >= 2 * points");
}

std::vector<double> default_poles(const Params& p, bool include_dummy) {
  std::vector<double> poles = p.a;
  if (include_dummy) poles.push_back(1.0);
  return poles;
}

ContourSpec build_contours(const Params& p, int k, const std::vector<double>& poles_in) {
  p.validate();
  if (k < 1) throw std::invalid_argument("build_contours: k must be >= 1");
  const std::vector<double> poles = poles_in.empty() ? default_poles(p) : poles_in;
  const auto [mn, mx] = std::minmax_element(poles.begin(), poles.end());
  const double amin = *mn, amax = *mx;
  const double C = 0.5 * (amin + amax);
  const double spread = amax - amin;
  const double rho_inner = 0.5 * spread + 0.25 * amin;
  if (!(rho_inner < C))
    throw std::invalid_argument(
        "build_contours: infeasible geometry, pole spread too large relative to min pole "
        "(innermost radius would reach the origin)");

  ContourSpec spec;
  spec.circles.assign(static_cast<std::size_t>(k), Circle{C, rho_inner});
  for (int A = k - 2; A >= 0; --A) {
    const double inner = spec.circles[static_cast<std::size_t>(A + 1)].radius;
    const double lo = (1.0 - p.q) * C + p.q * inner;
    spec.circles[static_cast<std::size_t>(A)] = Circle{C, 0.5 * (lo + C)};
  }
  const auto cert = spec.certify(p.q, poles);
  if (!cert.ok())
    throw std::logic_error("build_contours: certificate failed after construction");
  return spec;
}

ContourSpec build_contours_hugging(const Params& p, int k,
                                   const std::vector<double>& poles_in) {
  p.validate();
  if (k < 1) throw std::invalid_argument("build_contours_hugging: k must be >= 1");
  const std::vector<double> poles = poles_in.empty() ? default_poles(p) : poles_in;
  const auto [mn, mx] = std::minmax_element(poles.begin(), poles.end());
  const double amin = *mn, amax = *mx;

  // Each circle reaches left just past the q-scaled copy of the next one.
  // Tight clearance keeps the closest approach to the origin large, which
  // bounds the integrand envelope exp(t L (1/q - 1)/z) and with it the
  // cancellation in the quadrature sums.
  const double clearance = 0.93;
  const double right = amax + 0.25 * amin;
  double left = 0.9 * amin;
  ContourSpec spec;
  spec.circles.resize(static_cast<std::size_t>(k));
  for (int A = k - 1; A >= 0; --A) {
    spec.circles[static_cast<std::size_t>(A)] =
        Circle{0.5 * (left + right), 0.5 * (right - left)};
    left *= clearance * p.q;
  }
  const auto cert = spec.certify(p.q, poles);
  if (!cert.ok())
    throw std::logic_error("build_contours_hugging: certificate failed after construction");
  return spec;
}

// ---------------------------------------------------------------------------
// Nested integrator
// ---------------------------------------------------------------------------

namespace {

using cplx = std::complex<double>;

struct Grid {
  int M = 0;
  std::vector<cplx> z;
  std::vector<cplx> f0;                 // weight * Pi_t(qz)/Pi_t(z) / z
  std::vector<std::vector<cplx>> apow;  // apow[p][m] = prod_{i<=p} a_i/(a_i - z_m)
};

}  // namespace

struct NestedContourIntegrator::Impl {
  Params params;
  double t = 0.0;
  ContourSpec spec;
  QuadSpec quad;
  std::vector<double> poles;
  std::vector<std::map<int, Grid>> grids;  // per contour: point count -> grid
  std::vector<int> initial_profile;
  std::map<MultiIndex, ContourValue> memo;

  double ext_a(int i) const {  // a_i with dummy 1 beyond N
    return i <= params.N() ? params.a[static_cast<std::size_t>(i - 1)] : 1.0;
  }

  Grid& grid(int j, int M) {
    auto& slot = grids[static_cast<std::size_t>(j)];
    auto it = slot.find(M);
    if (it != slot.end()) return it->second;

    const Circle& c = spec.circles[static_cast<std::size_t>(j)];
    Grid g;
    g.M = M;
    g.z.resize(static_cast<std::size_t>(M));
    g.f0.resize(static_cast<std::size_t>(M));
    const double coef_r = t * params.R * (params.q - 1.0);
    const double coef_l = t * params.L * (1.0 / params.q - 1.0);
    for (int m = 0; m < M; ++m) {
      const double th = kTwoPi * m / M;
      const cplx e{std::cos(th), std::sin(th)};
      const cplx z = c.center + c.radius * e;
      g.z[static_cast<std::size_t>(m)] = z;
      const cplx w = c.radius * e / static_cast<double>(M);  // dz/(2 pi i)
      g.f0[static_cast<std::size_t>(m)] = w * std::exp(coef_r * z + coef_l / z) / z;
    }
    g.apow.emplace_back(static_cast<std::size_t>(M), cplx{1.0, 0.0});
    return slot.emplace(M, std::move(g)).first->second;
  }

  // F_j table for pole count p at point count M (cached per grid).
  const std::vector<cplx>& apow(int j, int M, int p) {
    Grid& g = grid(j, M);
    while (static_cast<int>(g.apow.size()) <= p) {
      const int pn = static_cast<int>(g.apow.size());
      const double ai = ext_a(pn);
      std::vector<cplx> next(g.apow.back());
      for (int m = 0; m < g.M; ++m)
        next[static_cast<std::size_t>(m)] *= ai / (ai - g.z[static_cast<std::size_t>(m)]);
      g.apow.push_back(std::move(next));
    }
    return g.apow[static_cast<std::size_t>(p)];
  }

  std::vector<cplx> f_table(int j, int M, int p) {
    const auto& ap = apow(j, M, p);
    const Grid& g = grid(j, M);
    std::vector<cplx> f(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
      f[static_cast<std::size_t>(m)] =
          g.f0[static_cast<std::size_t>(m)] * ap[static_cast<std::size_t>(m)];
    return f;
  }

  double prefactor(int k) const {
    return (k % 2 == 0 ? 1.0 : -1.0) * std::pow(params.q, 0.5 * k * (k - 1));
  }

  // Fourier decay factor of contour j from the distances of the singularity
  // families (poles a_i and the q-scaled rings inside; the origin and the
  // /q rings outside).
  double decay_factor(int j) const {
    const Circle& cj = spec.circles[static_cast<std::size_t>(j)];
    double lam = cj.radius / cj.center;
    for (double a : poles) lam = std::max(lam, std::abs(a - cj.center) / cj.radius);
    const int k = spec.k();
    for (int B = j + 1; B < k; ++B) {
      const Circle& cb = spec.circles[static_cast<std::size_t>(B)];
      lam = std::max(lam, (std::abs(cj.center - params.q * cb.center) +
                           params.q * cb.radius) /
                              cj.radius);
    }
    for (int A = 0; A < j; ++A) {
      const Circle& ca = spec.circles[static_cast<std::size_t>(A)];
      const double dist =
          std::abs(std::abs(ca.center / params.q - cj.center) - ca.radius / params.q);
      lam = std::max(lam, dist > cj.radius ? cj.radius / dist : 0.999);
    }
    return std::min(lam, 0.9995);
  }

  // log integrand envelope on contour j.
  double peak_exponent(int j) const {
    const Circle& cj = spec.circles[static_cast<std::size_t>(j)];
    double pk = 0.0;
    if (params.L > 0.0)
      pk += t * params.L * (1.0 / params.q - 1.0) / (cj.center - cj.radius);
    if (params.R > 0.0) pk += t * params.R * (1.0 - params.q) * (cj.center + cj.radius);
    return pk;
  }

  void compute_initial_profile() {
    const int k = spec.k();
    // Crude value-scale proxy: the k-fold first-particle moment magnitude.
    const double amin = *std::min_element(poles.begin(), poles.end());
    const double ln_scale =
        std::max(0.0, t * params.L * (std::pow(params.q, -k) - 1.0) / amin);
    initial_profile.assign(static_cast<std::size_t>(k), quad.points);
    for (int j = 0; j < k; ++j) {
      const double lam = decay_factor(j);
      const double need = std::min(
          1.0e7, (std::log(4.0 * k / quad.tol) +
                  std::max(0.0, peak_exponent(j) - ln_scale)) /
                     (-std::log(lam)));
      int M = pow2_ceil(static_cast<int>(std::ceil(need)));
      M = std::max(M, quad.points);
      M = std::min(M, quad.max_points / 4);  // leave room for refinement
      initial_profile[static_cast<std::size_t>(j)] = M;
    }
  }

  // Plain evaluation at a fixed point profile.
  cplx evaluate(const MultiIndex& n, const std::vector<int>& prof) {
    const int k = spec.k();
    const double q = params.q;

    std::vector<std::vector<cplx>> F(static_cast<std::size_t>(k));
    std::vector<const cplx*> Z(static_cast<std::size_t>(k));
    std::vector<int> M(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      const int Mj = prof[static_cast<std::size_t>(j)];
      F[static_cast<std::size_t>(j)] = f_table(j, Mj, n[static_cast<std::size_t>(j)]);
      Z[static_cast<std::size_t>(j)] = grid(j, Mj).z.data();
      M[static_cast<std::size_t>(j)] = Mj;
    }

    auto cross = [&](cplx za, cplx zb) { return (za - zb) / (za - q * zb); };
    const bool sym = quad.exploit_conjugate_symmetry && k >= 2;
    const int m1_end = sym ? M[0] / 2 : M[0] - 1;

    cplx total{0.0, 0.0};
    double total_re = 0.0;
    auto fold = [&](int m1, cplx contrib) {
      if (sym) {
        const double mult = (m1 == 0 || 2 * m1 == M[0]) ? 1.0 : 2.0;
        total_re += mult * contrib.real();
      } else {
        total += contrib;
      }
    };

    if (k == 1) {
      for (int m = 0; m < M[0]; ++m) total += F[0][static_cast<std::size_t>(m)];
      return prefactor(1) * total;
    }

    if (k == 2) {
      for (int m1 = 0; m1 <= m1_end; ++m1) {
        const cplx z1 = Z[0][m1];
        cplx s1{0.0, 0.0};
        for (int m2 = 0; m2 < M[1]; ++m2)
          s1 += F[1][static_cast<std::size_t>(m2)] * cross(z1, Z[1][m2]);
        fold(m1, F[0][static_cast<std::size_t>(m1)] * s1);
      }
      return prefactor(2) * (sym ? cplx{total_re, 0.0} : total);
    }

    if (k == 3) {
      std::vector<cplx> V(static_cast<std::size_t>(M[1]) * static_cast<std::size_t>(M[2]));
      for (int m2 = 0; m2 < M[1]; ++m2) {
        cplx* row = V.data() + static_cast<std::size_t>(m2) * static_cast<std::size_t>(M[2]);
        const cplx z2 = Z[1][m2];
        for (int m3 = 0; m3 < M[2]; ++m3)
          row[m3] = F[2][static_cast<std::size_t>(m3)] * cross(z2, Z[2][m3]);
      }
      std::vector<cplx> g13(static_cast<std::size_t>(M[2]));
      for (int m1 = 0; m1 <= m1_end; ++m1) {
        const cplx z1 = Z[0][m1];
        for (int m3 = 0; m3 < M[2]; ++m3)
          g13[static_cast<std::size_t>(m3)] = cross(z1, Z[2][m3]);
        cplx s1{0.0, 0.0};
        for (int m2 = 0; m2 < M[1]; ++m2) {
          const cplx* row =
              V.data() + static_cast<std::size_t>(m2) * static_cast<std::size_t>(M[2]);
          cplx s2{0.0, 0.0};
          for (int m3 = 0; m3 < M[2]; ++m3)
            s2 += g13[static_cast<std::size_t>(m3)] * row[m3];
          s1 += F[1][static_cast<std::size_t>(m2)] * cross(z1, Z[1][m2]) * s2;
        }
        fold(m1, F[0][static_cast<std::size_t>(m1)] * s1);
      }
      return prefactor(3) * (sym ? cplx{total_re, 0.0} : total);
    }

    if (k == 4) {
      std::vector<cplx> V(static_cast<std::size_t>(M[2]) * static_cast<std::size_t>(M[3]));
      for (int m3 = 0; m3 < M[2]; ++m3) {
        cplx* row = V.data() + static_cast<std::size_t>(m3) * static_cast<std::size_t>(M[3]);
        const cplx z3 = Z[2][m3];
        for (int m4 = 0; m4 < M[3]; ++m4)
          row[m4] = F[3][static_cast<std::size_t>(m4)] * cross(z3, Z[3][m4]);
      }
      std::vector<cplx> g13(static_cast<std::size_t>(M[2])), g14(static_cast<std::size_t>(M[3])),
          p24(static_cast<std::size_t>(M[3]));
      for (int m1 = 0; m1 <= m1_end; ++m1) {
        const cplx z1 = Z[0][m1];
        for (int m3 = 0; m3 < M[2]; ++m3)
          g13[static_cast<std::size_t>(m3)] = cross(z1, Z[2][m3]);
        for (int m4 = 0; m4 < M[3]; ++m4)
          g14[static_cast<std::size_t>(m4)] = cross(z1, Z[3][m4]);
        cplx s1{0.0, 0.0};
        for (int m2 = 0; m2 < M[1]; ++m2) {
          const cplx z2 = Z[1][m2];
          for (int m4 = 0; m4 < M[3]; ++m4)
            p24[static_cast<std::size_t>(m4)] =
                g14[static_cast<std::size_t>(m4)] * cross(z2, Z[3][m4]);
          cplx s2{0.0, 0.0};
          for (int m3 = 0; m3 < M[2]; ++m3) {
            const cplx* row =
                V.data() + static_cast<std::size_t>(m3) * static_cast<std::size_t>(M[3]);
            cplx s3{0.0, 0.0};
            for (int m4 = 0; m4 < M[3]; ++m4)
              s3 += p24[static_cast<std::size_t>(m4)] * row[m4];
            s2 += F[2][static_cast<std::size_t>(m3)] * g13[static_cast<std::size_t>(m3)] *
                  cross(z2, Z[2][m3]) * s3;
          }
          s1 += F[1][static_cast<std::size_t>(m2)] * cross(z1, z2) * s2;
        }
        fold(m1, F[0][static_cast<std::size_t>(m1)] * s1);
      }
      return prefactor(4) * (sym ? cplx{total_re, 0.0} : total);
    }

    throw std::invalid_argument("NestedContourIntegrator: k is capped at 4");
  }

  // Adaptive refinement with per-contour halving probes: contour j is
  // accepted once dropping it to half its points moves the value by at most
  // tol/(2k) relative; otherwise it is doubled (up to the cap).
  ContourValue adapt(const MultiIndex& n) {
    const int k = spec.k();
    std::vector<int> prof = initial_profile;
    cplx v = evaluate(n, prof);
    for (int iter = 0; iter < 40; ++iter) {
      const double scale = std::max(1.0, std::abs(v));
      const double budget = quad.tol * scale / (2.0 * k);
      double est_total = 0.0;
      bool grew = false;
      bool stuck = false;
      for (int j = 0; j < k; ++j) {
        std::vector<int> half = prof;
        half[static_cast<std::size_t>(j)] /= 2;
        const double est = std::abs(evaluate(n, half) - v);
        est_total += est;
        if (est > budget) {
          if (prof[static_cast<std::size_t>(j)] < quad.max_points) {
            prof[static_cast<std::size_t>(j)] *= 2;
            grew = true;
          } else {
            stuck = true;
          }
        }
      }
      if (!grew) {
        if (stuck)
          throw std::runtime_error(
              "moment_contour: quadrature did not converge within the point cap");
        return {v, est_total / scale, prof};
      }
      v = evaluate(n, prof);
    }
    throw std::runtime_error("moment_contour: adaptive refinement failed to settle");
  }
};

NestedContourIntegrator::NestedContourIntegrator(const Params& p, double t,
                                                 const ContourSpec& spec,
                                                 const QuadSpec& quad,
                                                 std::vector<double> poles)
    : impl_(std::make_unique<Impl>()) {
  p.validate();
  quad.validate();
  if (t < 0.0) throw std::invalid_argument("NestedContourIntegrator: t must be >= 0");
  if (spec.k() < 1 || spec.k() > 4)
    throw std::invalid_argument("NestedContourIntegrator: k must be in 1..4");
  impl_->params = p;
  impl_->t = t;
  impl_->spec = spec;
  impl_->quad = quad;
  impl_->poles = poles.empty() ? default_poles(p) : std::move(poles);
  const auto cert = spec.certify(p.q, impl_->poles);
  if (!cert.ok())
    throw std::invalid_argument("NestedContourIntegrator: contour certificate invalid");
  impl_->grids.resize(static_cast<std::size_t>(spec.k()));
  impl_->compute_initial_profile();
}

NestedContourIntegrator::~NestedContourIntegrator() = default;
NestedContourIntegrator::NestedContourIntegrator(NestedContourIntegrator&&) noexcept = default;

ContourValue NestedContourIntegrator::eval(const MultiIndex& n) {
  const int k = impl_->spec.k();
  if (static_cast<int>(n.size()) != k)
    throw std::invalid_argument("NestedContourIntegrator::eval: n must have k entries");
  for (int v : n)
    if (v < 0) throw std::invalid_argument("NestedContourIntegrator::eval: n must be >= 0");
  if (auto it = impl_->memo.find(n); it != impl_->memo.end()) return it->second;
  const ContourValue out = impl_->adapt(n);
  impl_->memo.emplace(n, out);
  return out;
}

std::vector<ContourValue> NestedContourIntegrator::eval_batch(
    const std::vector<MultiIndex>& ns) {
  const int k = impl_->spec.k();
  if (ns.empty()) return {};
  for (const auto& n : ns) {
    if (static_cast<int>(n.size()) != k)
      throw std::invalid_argument("eval_batch: every n must have k entries");
    for (int v : n)
      if (v < 0) throw std::invalid_argument("eval_batch: n must be >= 0");
  }

  // Certify the point profile on the componentwise-max probe index (the
  // heaviest integrand of the batch), then share grids and inner tensors.
  MultiIndex probe(static_cast<std::size_t>(k), 0);
  for (const auto& n : ns)
    for (int j = 0; j < k; ++j)
      probe[static_cast<std::size_t>(j)] =
          std::max(probe[static_cast<std::size_t>(j)], n[static_cast<std::size_t>(j)]);
  const ContourValue cert = impl_->adapt(probe);
  const std::vector<int>& prof = cert.points_used;

  std::vector<ContourValue> out(ns.size());
  if (k <= 2) {
    for (std::size_t i = 0; i < ns.size(); ++i)
      out[i] = ContourValue{impl_->evaluate(ns[i], prof), cert.est_rel_error, prof};
    return out;
  }

  // k == 3 or 4: group by the trailing sub-index and share the inner sums.
  if (k == 3) {
    const int M1 = prof[0], M2 = prof[1], M3 = prof[2];
    const double q = impl_->params.q;
    auto cross = [&](cplx za, cplx zb) { return (za - zb) / (za - q * zb); };
    const cplx* Z1 = impl_->grid(0, M1).z.data();
    const cplx* Z2 = impl_->grid(1, M2).z.data();
    const cplx* Z3 = impl_->grid(2, M3).z.data();
    const bool sym = impl_->quad.exploit_conjugate_symmetry;
    const int m1_end = sym ? M1 / 2 : M1 - 1;
    const int rows1 = m1_end + 1;

    // Group indices by n3.
    std::map<int, std::vector<std::size_t>> by_n3;
    for (std::size_t i = 0; i < ns.size(); ++i) by_n3[ns[i][2]].push_back(i);

    std::vector<cplx> G23(static_cast<std::size_t>(M2) * static_cast<std::size_t>(M3));
    for (int m2 = 0; m2 < M2; ++m2)
      for (int m3 = 0; m3 < M3; ++m3)
        G23[static_cast<std::size_t>(m2) * static_cast<std::size_t>(M3) +
            static_cast<std::size_t>(m3)] = cross(Z2[m2], Z3[m3]);

    std::vector<cplx> T(static_cast<std::size_t>(rows1) * static_cast<std::size_t>(M2));
    std::vector<cplx> g13(static_cast<std::size_t>(M3));
    for (const auto& [n3, members] : by_n3) {
      const auto F3 = impl_->f_table(2, M3, n3);
      // T[m1][m2] = sum_m3 G13 G23 F3
      for (int m1 = 0; m1 < rows1; ++m1) {
        const cplx z1 = Z1[m1];
        for (int m3 = 0; m3 < M3; ++m3)
          g13[static_cast<std::size_t>(m3)] =
              cross(z1, Z3[m3]) * F3[static_cast<std::size_t>(m3)];
        cplx* trow = T.data() + static_cast<std::size_t>(m1) * static_cast<std::size_t>(M2);
        for (int m2 = 0; m2 < M2; ++m2) {
          const cplx* grow =
              G23.data() + static_cast<std::size_t>(m2) * static_cast<std::size_t>(M3);
          cplx s{0.0, 0.0};
          for (int m3 = 0; m3 < M3; ++m3)
            s += g13[static_cast<std::size_t>(m3)] * grow[m3];
          trow[m2] = s;
        }
      }
      for (std::size_t idx : members) {
        const auto F1 = impl_->f_table(0, M1, ns[idx][0]);
        const auto F2 = impl_->f_table(1, M2, ns[idx][1]);
        cplx total{0.0, 0.0};
        double total_re = 0.0;
        for (int m1 = 0; m1 < rows1; ++m1) {
          const cplx z1 = Z1[m1];
          const cplx* trow =
              T.data() + static_cast<std::size_t>(m1) * static_cast<std::size_t>(M2);
          cplx s1{0.0, 0.0};
          for (int m2 = 0; m2 < M2; ++m2)
            s1 += F2[static_cast<std::size_t>(m2)] * cross(z1, Z2[m2]) * trow[m2];
          const cplx contrib = F1[static_cast<std::size_t>(m1)] * s1;
          if (sym) {
            const double mult = (m1 == 0 || 2 * m1 == M1) ? 1.0 : 2.0;
            total_re += mult * contrib.real();
          } else {
            total += contrib;
          }
        }
        const cplx value =
            impl_->prefactor(3) * (sym ? cplx{total_re, 0.0} : total);
        out[idx] = ContourValue{value, cert.est_rel_error, prof};
      }
    }
    return out;
  }

  // k == 4: fall back to per-index evaluation at the certified profile.
  for (std::size_t i = 0; i < ns.size(); ++i)
    out[i] = ContourValue{impl_->evaluate(ns[i], prof), cert.est_rel_error, prof};
  return out;
}

std::complex<double> NestedContourIntegrator::eval_at(const MultiIndex& n,
                                                      const std::vector<int>& points) {
  return impl_->evaluate(n, points);
}

ContourValue moment_contour(const Params& p, const MultiIndex& n, double t,
                            const ContourSpec& spec, const QuadSpec& quad) {
  NestedContourIntegrator integ(p, t, spec, quad);
  return integ.eval(n);
}

// ---------------------------------------------------------------------------
// Free evolution condition checks
// ---------------------------------------------------------------------------

namespace {

double ext_a_of(const Params& p, int i) {
  return i <= p.N() ? p.a[static_cast<std::size_t>(i - 1)] : 1.0;
}

}  // namespace

FreeConditionReport verify_free_conditions(const Params& p, double t, int k,
                                           const QuadSpec& quad, int nsamples,
                                           std::uint64_t seed, double h) {
  p.validate();
  if (k < 2 || k > 3)
    throw std::invalid_argument("verify_free_conditions: k must be 2 or 3");
  if (!(t > 0.0 && h > 0.0 && h < t))
    throw std::invalid_argument("verify_free_conditions: need 0 < h < t");

  // Dummy parameters a_n = 1 for n > N are exercised, so 1 joins the pole hull.
  const auto poles = default_poles(p, true);
  const ContourSpec spec = build_contours_hugging(p, k, poles);

  NestedContourIntegrator at_t(p, t, spec, quad, poles);
  NestedContourIntegrator at_tp(p, t + h, spec, quad, poles);
  NestedContourIntegrator at_tm(p, t - h, spec, quad, poles);

  auto rng = make_stream(seed, 0);
  std::uniform_int_distribution<int> entry(1, p.N() + 1);
  std::uniform_int_distribution<int> pos(0, k - 2);

  FreeConditionReport rep;
  rep.time_step = h;
  rep.samples = nsamples;

  for (int s = 0; s < nsamples; ++s) {
    MultiIndex n(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) n[static_cast<std::size_t>(j)] = entry(rng);
    const int i = pos(rng);  // cluster at coordinates (i, i+1), 0-based
    n[static_cast<std::size_t>(i + 1)] = n[static_cast<std::size_t>(i)];

    const double m0 = at_t.eval(n).value.real();
    const double scale = std::max(1.0, std::abs(m0));

    auto grad = [&](NestedContourIntegrator& integ, const MultiIndex& nn, int coord) {
      MultiIndex down = nn;
      down[static_cast<std::size_t>(coord)] -= 1;
      const double an = ext_a_of(p, nn[static_cast<std::size_t>(coord)]);
      return an * (integ.eval(down).value.real() - integ.eval(nn).value.real());
    };
    auto grad_inv = [&](NestedContourIntegrator& integ, const MultiIndex& nn, int coord) {
      double acc = 0.0;  // value at argument 0 is the empty sum
      MultiIndex probe = nn;
      for (int v = 1; v <= nn[static_cast<std::size_t>(coord)]; ++v) {
        probe[static_cast<std::size_t>(coord)] = v;
        acc -= integ.eval(probe).value.real() / ext_a_of(p, v);
      }
      return acc;
    };

    const double b = grad(at_t, n, i) - p.q * grad(at_t, n, i + 1);
    rep.max_boundary_residual = std::max(rep.max_boundary_residual, std::abs(b) / scale);

    const double c = grad_inv(at_t, n, i) - (1.0 / p.q) * grad_inv(at_t, n, i + 1);
    rep.max_cumulative_residual = std::max(rep.max_cumulative_residual, std::abs(c) / scale);

    const double dmdt =
        (at_tp.eval(n).value.real() - at_tm.eval(n).value.real()) / (2.0 * h);
    double rhs = 0.0;
    for (int j = 0; j < k; ++j) {
      rhs += p.R * (1.0 - p.q) * grad(at_t, n, j);
      rhs += p.L * (1.0 - 1.0 / p.q) * grad_inv(at_t, n, j);
    }
    rep.max_free_eqn_residual =
        std::max(rep.max_free_eqn_residual, std::abs(dmdt - rhs) / scale);
  }
  return rep;
}

PartialSumReport partial_sum_identity_check(const std::vector<double>& a, int z_samples,
                                            std::uint64_t seed) {
  if (a.empty()) throw std::invalid_argument("partial_sum_identity_check: a must be nonempty");
  auto rng = make_stream(seed, 0);
  std::uniform_real_distribution<double> re(-2.0, 2.0);
  std::uniform_real_distribution<double> im(0.3, 2.0);

  PartialSumReport rep;
  const int n_max = static_cast<int>(a.size());
  for (int s = 0; s < z_samples; ++s) {
    const cplx z{re(rng), im(rng)};  // safely off {0} and the real poles a_i
    std::vector<cplx> S(static_cast<std::size_t>(n_max + 1));
    // S_n = (1/z) prod_{r<=n} (a_r - z)/a_r + sum_{j<=n} a_j^{-1} prod_{r>j} (a_r - z)/a_r
    for (int n = 0; n <= n_max; ++n) {
      cplx first = 1.0 / z;
      for (int r = 1; r <= n; ++r)
        first *= (a[static_cast<std::size_t>(r - 1)] - z) / a[static_cast<std::size_t>(r - 1)];
      cplx second{0.0, 0.0};
      for (int j = 1; j <= n; ++j) {
        cplx tail{1.0, 0.0};
        for (int r = j + 1; r <= n; ++r)
          tail *= (a[static_cast<std::size_t>(r - 1)] - z) / a[static_cast<std::size_t>(r - 1)];
        second += tail / a[static_cast<std::size_t>(j - 1)];
      }
      S[static_cast<std::size_t>(n)] = first + second;
      rep.max_deviation =
          std::max(rep.max_deviation, std::abs(S[static_cast<std::size_t>(n)] - 1.0 / z));
      if (n >= 1) {
        const double an = a[static_cast<std::size_t>(n - 1)];
        const cplx lhs = S[static_cast<std::size_t>(n - 1)] * (an - z) / an;
        const cplx rhs = S[static_cast<std::size_t>(n)] - 1.0 / an;
        rep.max_recursion_residual = std::max(rep.max_recursion_residual, std::abs(lhs - rhs));
      }
    }
  }
  return rep;
}

}  // namespace qpush
