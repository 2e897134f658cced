#pragma once

#include <complex>
#include <cstdint>

namespace qpush {

// Streaming mean/variance accumulator.  merge() is associative, so chunked
// accumulation gives results independent of the thread schedule as long as
// the chunk decomposition and merge order are fixed.
struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) { *this = o; return; }
    const double d = o.mean - mean;
    const std::int64_t tot = n + o.n;
    mean += d * static_cast<double>(o.n) / static_cast<double>(tot);
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) /
                     static_cast<double>(tot);
    n = tot;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stderr_of_mean() const;
};

// Complex-valued variant; the spread is tracked as scalar E|x - mean|^2.
struct WelfordComplex {
  std::int64_t n = 0;
  std::complex<double> mean{0.0, 0.0};
  double m2 = 0.0;

  void add(std::complex<double> x) {
    ++n;
    const std::complex<double> d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += std::real(d * std::conj(x - mean));
  }

  void merge(const WelfordComplex& o) {
    if (o.n == 0) return;
    if (n == 0) { *this = o; return; }
    const std::complex<double> d = o.mean - mean;
    const std::int64_t tot = n + o.n;
    mean += d * (static_cast<double>(o.n) / static_cast<double>(tot));
    m2 += o.m2 + std::norm(d) * static_cast<double>(n) *
                     static_cast<double>(o.n) / static_cast<double>(tot);
    n = tot;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stderr_of_mean() const;
};

// Regularized upper incomplete gamma Q(a, x).
double gammq(double a, double x);

// Upper-tail p-value of a chi-square statistic with `dof` degrees of freedom.
double chi_square_pvalue(double stat, int dof);

}  // namespace qpush
