#pragma once

#include <cstdint>
#include <vector>

#include "qpush/model.hpp"
#include "qpush/simulate.hpp"

namespace qpush {

// Weak-asymmetry scaling: q = e^{-eps}, t = eps^{-2} tau, a_k = e^{-eps sa_k},
// R = e^{-eps r}, L = e^{-eps l}.
struct ScalingParams {
  double eps = 0.2;
  std::vector<double> sa;  // scaled speeds
  double r = 0.0;
  double l = 0.0;
  double dt = 1e-3;

  int N() const { return static_cast<int>(sa.size()); }
  void validate() const;
  Params lattice_params() const;  // finite-eps q-PushASEP parameters
};

// Drift of the leftmost-edge diffusion hierarchy:
// -2 sa_k + l - r - exp(G_k - G_{k-1}), with G_0 == 0.
double sde_drift(int k, double G_k, double G_km1, const ScalingParams& sp);
double sde_diffusion();  // sqrt(2)

struct SdePathStats {
  std::vector<double> mean;      // per level
  std::vector<double> stderr_;   // per level
  std::int64_t npaths = 0;
};

// Euler-Maruyama over [0, tau_end]; initial values G_k(0) = g0[k-1]
// (zeros when g0 is empty).  `drop_interaction` removes the exp(G_k - G_{k-1})
// term (used to isolate integrator correctness on level 1).
SdePathStats simulate_sde_hierarchy(const ScalingParams& sp, double tau_end,
                                    std::int64_t npaths, std::uint64_t seed,
                                    const std::vector<double>& g0 = {},
                                    bool drop_interaction = false);

// Strong (pathwise) self-consistency: the same Brownian path integrated at
// dt and dt/2; returns E |G^{dt}_1(tau) - G^{dt/2}_1(tau)|.
double em_coupled_step_error(const ScalingParams& sp, double tau_end,
                             std::int64_t npaths, std::uint64_t seed);

struct RescaleReport {
  double tau = 0.0;
  double eps = 0.0;
  std::vector<double> lattice_mean;    // rescaled q-PushASEP leftmost marginals
  std::vector<double> lattice_stderr;
  std::vector<double> sde_mean;
  std::vector<double> sde_stderr;
  double level1_discrepancy = 0.0;     // |lattice - sde| at level 1
};

// Simulates the q-PushASEP at t = eps^{-2} tau, maps endpoints through the
// scaling (global shift C = 0), and compares with the SDE hierarchy started
// from the packed-state image G_k(0) = -(k-1) log eps.
// Throws when the expected event count exceeds `event_budget`.
RescaleReport rescale_pushasep(const ScalingParams& sp, double tau,
                               std::int64_t npaths, std::uint64_t seed,
                               double event_budget = 5e8);

// |finite-eps right-jump rate - its first-order expansion| for the leftmost
// particles; the remainder must be O(eps^2).
double rate_expansion_remainder(double eps, double sa_k, double r, double delta_G);

}  // namespace qpush
