#include "qpush/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace qpush {

double Welford::stderr_of_mean() const {
  return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

double WelfordComplex::stderr_of_mean() const {
  return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

namespace {

// Series expansion of P(a,x), valid for x < a+1.
double gser(double a, double x) {
  const int kItMax = 500;
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kItMax; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x), valid for x >= a+1 (modified Lentz).
double gcf(double a, double x) {
  const int kItMax = 500;
  const double kFpMin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kItMax; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gammq(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammq: need x >= 0 and a > 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gser(a, x);
  return gcf(a, x);
}

double chi_square_pvalue(double stat, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi_square_pvalue: dof must be positive");
  return gammq(0.5 * static_cast<double>(dof), 0.5 * stat);
}

}  // namespace qpush
