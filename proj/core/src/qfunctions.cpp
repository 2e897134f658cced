#include "qpush/qfunctions.hpp"

#include <cmath>
#include <stdexcept>

namespace qpush {

double qpow(double q, std::int64_t e) {
  return std::pow(q, static_cast<double>(e));
}

double qpow_gap(double q, std::int64_t gap) {
  if (gap == kInfiniteGap) return 0.0;
  return qpow(q, gap);
}

double qpoch_finite(double a, double q, int k) {
  double p = 1.0;
  double aq = a;
  for (int i = 0; i < k; ++i) {
    p *= 1.0 - aq;
    aq *= q;
  }
  return p;
}

std::complex<double> qpoch_finite(std::complex<double> a, double q, int k) {
  std::complex<double> p{1.0, 0.0};
  std::complex<double> aq = a;
  for (int i = 0; i < k; ++i) {
    p *= 1.0 - aq;
    aq *= q;
  }
  return p;
}

namespace {

int truncation_depth(double mag, double q, double tol) {
  if (mag < tol) return 0;
  // smallest m with mag * q^m < tol
  const int m = static_cast<int>(std::ceil(std::log(tol / mag) / std::log(q)));
  return m < 0 ? 0 : m;
}

}  // namespace

double qpoch_inf(double a, double q, double tol) {
  if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("qpoch_inf: q must be in (0,1)");
  if (tol <= 0.0) throw std::invalid_argument("qpoch_inf: tol must be positive");
  const int m = truncation_depth(std::abs(a), q, tol);
  return qpoch_finite(a, q, m);
}

std::complex<double> qpoch_inf(std::complex<double> a, double q, double tol) {
  if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("qpoch_inf: q must be in (0,1)");
  if (tol <= 0.0) throw std::invalid_argument("qpoch_inf: tol must be positive");
  const int m = truncation_depth(std::abs(a), q, tol);
  return qpoch_finite(a, q, m);
}

std::complex<double> qpoch_ratio(std::complex<double> num, std::complex<double> den,
                                 double q, double tol) {
  const double mag = std::max(std::abs(num), std::abs(den));
  const int m = truncation_depth(mag, q, tol);
  std::complex<double> r{1.0, 0.0};
  std::complex<double> nq = num, dq = den;
  for (int i = 0; i < m; ++i) {
    r *= (1.0 - nq) / (1.0 - dq);
    nq *= q;
    dq *= q;
  }
  return r;
}

double qq_factorial(double q, int k) { return qpoch_finite(q, q, k); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace qpush
