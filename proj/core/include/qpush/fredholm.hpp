#pragma once

#include <complex>
#include <vector>

#include "qpush/model.hpp"

namespace qpush {

// Kernel data for the q-Laplace transform determinant of particle n at time t:
// an integral operator on a small circle C_1 around 1.
struct KernelSpec {
  Params params;
  int n = 1;               // particle index
  double t = 0.0;
  std::complex<double> zeta{0.0, 0.0};  // must avoid (0, inf)
  double c1_radius = 0.0;  // 0 = pick default 0.5 (1-sqrt q)/(1+sqrt q)
  int mb_points = 512;     // trapezoid nodes on the Re s = 1/2 line
  double mb_truncation = 0.0;  // 0 = pick from the decay of 1/sin(pi s)
  int nystrom_points = 64;

  void validate() const;
  double radius() const;
  double truncation() const;
};

// K_zeta(w, w'): Mellin-Barnes integral over Re s = 1/2.
std::complex<double> kernel_eval(const KernelSpec& spec, std::complex<double> w,
                                 std::complex<double> wp);

// Nystrom value of det(I + K_zeta) on C_1 with dw/(2 pi i) weights.
std::complex<double> fredholm_det(const KernelSpec& spec);

// Exact q-Laplace transform of q^{x_1(t)+1} for the step initial condition:
// x_1(t)+1 is the difference of two Poisson counts with means R a_1 t and
// L a_1^{-1} t, so the expectation is a Skellam-weighted sum.
std::complex<double> qlaplace_exact_n1(const Params& p, double t,
                                       std::complex<double> zeta,
                                       double tail_tol = 1e-14);

struct DivergenceRow {
  int k = 0;
  double moment = 0.0;  // E q^{k (x_n(t)+n)}
  double term = 0.0;    // |zeta|^k moment / (q;q)_k
};

// Terms of the q-Binomial moment series; super-exponential growth when L > 0.
std::vector<DivergenceRow> divergence_demo(const Params& p, double t, int kmax,
                                           double abs_zeta, int n_index = 1);

}  // namespace qpush
