#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpush/qfunctions.hpp"
#include "qpush/rng.hpp"
#include "qpush/stationary.hpp"

using namespace qpush;

TEST_CASE("q-geometric pmf") {
  QGeoLaw law{0.3, 0.5};
  CHECK(qgeo_pmf(law, 0) == doctest::Approx(qpoch_inf(0.3, 0.5)).epsilon(1e-14));

  double sum = 0.0;
  for (int k = 0; k <= 200; ++k) sum += qgeo_pmf(law, k);
  CHECK(std::abs(sum - 1.0) < 1e-12);

  // E q^{gap} = 1 - beta
  CHECK(qgeo_mean_qpow(law) == doctest::Approx(0.7).epsilon(1e-12));

  QGeoLaw bad{1.2, 0.5};
  CHECK_THROWS_AS(qgeo_pmf(bad, 0), std::invalid_argument);
}

TEST_CASE("push-rate sum telescopes to L R / alpha") {
  const Params p = Params::make(0.5, 1.0, 0.8, {1.0});
  // geometric ratio 1/2
  CHECK(push_rate_sum(p, 0.5) == doctest::Approx(2.0 * p.L).epsilon(1e-12));
  // alpha near R: only the leading term survives
  CHECK(push_rate_sum(p, 0.999) == doctest::Approx(p.L * 1.0 / 0.999).epsilon(1e-12));

  auto rng = make_stream(55, 0);
  std::uniform_real_distribution<double> ad(0.5, 2.0);
  std::vector<double> window(400);
  for (auto& v : window) v = ad(rng);
  const double alpha = 0.3;
  CHECK(push_rate_sum_inhomogeneous(p, alpha, window) ==
        doctest::Approx(p.L * p.R / alpha).epsilon(1e-12));
}

TEST_CASE("gap chain leaves the q-geometric law invariant") {
  const Params p = Params::make(0.5, 1.0, 0.7, {1.0});
  const double alpha = 0.3;
  CHECK(gap_chain_stationarity_residual(p, alpha, 80) < 1e-10);
  CHECK(gap_chain_stationarity_residual(p, alpha, 40) < 1e-10);
  CHECK(gap_chain_stationarity_residual(p, alpha, 200) < 1e-10);
  CHECK(gap_chain_detailed_balance_residual(p, alpha, 80) < 1e-12);

  // frozen chain at L = 0
  const Params p0 = Params::make(0.5, 1.0, 0.0, {1.0});
  CHECK(gap_chain_stationarity_residual(p0, alpha, 80) == 0.0);
}

TEST_CASE("simulated gap chain matches the q-geometric law") {
  const Params p = Params::make(0.5, 1.0, 1.0, {1.0});
  const auto rep = gap_chain_simulation_check(p, 0.3, 20000, 4.0, 20250810);
  CHECK(rep.dof >= 2);
  CHECK(rep.p_value > 0.01);
}
