#pragma once

#include <complex>
#include <cstdint>
#include <limits>

namespace qpush {

// Sentinel for an infinite gap (the slot to the right of the first particle).
inline constexpr std::int64_t kInfiniteGap = std::numeric_limits<std::int64_t>::max();

// q^e for integer e (e may be negative).
double qpow(double q, std::int64_t e);

// q^gap with the convention q^{+inf} = 0 for the sentinel gap.
double qpow_gap(double q, std::int64_t gap);

// Finite q-Pochhammer (a;q)_k = prod_{i<k} (1 - a q^i).
double qpoch_finite(double a, double q, int k);
std::complex<double> qpoch_finite(std::complex<double> a, double q, int k);

// Infinite q-Pochhammer (a;q)_inf, truncated at the smallest m with
// |a| q^m < tol.  The dropped tail satisfies |log tail| <= tol / (1-q),
// so the relative truncation error is below tol/(1-q).
double qpoch_inf(double a, double q, double tol = 1e-15);
std::complex<double> qpoch_inf(std::complex<double> a, double q, double tol = 1e-15);

// (num;q)_inf / (den;q)_inf evaluated factor by factor; avoids cancellation
// between two separately truncated products.
std::complex<double> qpoch_ratio(std::complex<double> num, std::complex<double> den,
                                 double q, double tol = 1e-15);

// (q;q)_k.
double qq_factorial(double q, int k);

// Binomial coefficient as a double (sizes used here stay well inside 2^53).
double binomial(int n, int k);

}  // namespace qpush
