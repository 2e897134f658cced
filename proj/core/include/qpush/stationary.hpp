#pragma once

#include <cstdint>
#include <vector>

#include "qpush/model.hpp"

namespace qpush {

// q-geometric gap law qGeo(beta): pmf (beta;q)_inf beta^k / (q;q)_k.
struct QGeoLaw {
  double beta = 0.0;  // alpha/R, or alpha/(R a_i) in the inhomogeneous case
  double q = 0.5;

  void validate() const;  // beta in [0,1), q in (0,1)
};

double qgeo_pmf(const QGeoLaw& law, int k);

// E q^{gap} under qGeo(beta) equals 1 - beta.
double qgeo_mean_qpow(const QGeoLaw& law, double tail_tol = 1e-15);

// Total left-move rate of a tagged particle fed by pushes from the right:
// L sum_m prod of E q^{gap} factors.  Equals L R / alpha in both the
// homogeneous and the speed-inhomogeneous case.
double push_rate_sum(const Params& p, double alpha, double tail_tol = 1e-15);
double push_rate_sum_inhomogeneous(const Params& p, double alpha,
                                   const std::vector<double>& window_speeds);

// Birth-death chain on {0..K} with up rate L and down rate (LR/alpha)(1-q^k);
// returns the max |generator applied to the qGeo pmf| away from the
// truncation boundary.
double gap_chain_stationarity_residual(const Params& p, double alpha, int K);

// Max detailed-balance violation L pmf(k) - (LR/alpha)(1-q^{k+1}) pmf(k+1).
double gap_chain_detailed_balance_residual(const Params& p, double alpha, int K);

struct GapChainSimReport {
  double chi_square = 0.0;
  double p_value = 0.0;
  int dof = 0;
  std::int64_t samples = 0;
};

// Simulates the gap birth-death chain and chi-square-tests the empirical
// distribution (sampled at well-separated times) against qGeo.
GapChainSimReport gap_chain_simulation_check(const Params& p, double alpha,
                                             std::int64_t samples, double spacing,
                                             std::uint64_t seed);

}  // namespace qpush
