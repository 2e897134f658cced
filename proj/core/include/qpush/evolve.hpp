#pragma once

#include <cstdint>
#include <vector>

#include "qpush/model.hpp"

namespace qpush {

// Dense action of the dual operator on the level set Y^N_k.  Row y of
// `entries` holds the coefficients of d/dt h(t,y) in terms of h(t,y').
// The basis is ordered ascending-lexicographically in the reversed tuple
// (y_N, ..., y_0), which makes the matrix lower triangular.
struct DualGeneratorMatrix {
  int N = 0;
  int k = 0;
  std::vector<OccupationState> basis;
  std::vector<double> entries;  // row-major dim() x dim()

  int dim() const { return static_cast<int>(basis.size()); }
  double at(int row, int col) const {
    return entries[static_cast<std::size_t>(row) * static_cast<std::size_t>(dim()) +
                   static_cast<std::size_t>(col)];
  }
  int index_of(const OccupationState& y) const;  // -1 if absent
  bool lower_triangular(double tol = 0.0) const;
};

// Builds the generator matrix; throws if binomial(k+N, N) exceeds dim_cap.
DualGeneratorMatrix build_dual_generator(const Params& p, int k,
                                         std::int64_t dim_cap = 20000);

// Initial data h_0(y) = H(x0, y) in basis order.
std::vector<double> initial_data(const Params& p, const DualGeneratorMatrix& gen,
                                 const ParticleConfig& x0);

// h(t, .) = exp(t M) h0.  The boundary rule h(t,y) = 0 for y_0 > 0 is
// preserved automatically: slots with y_0 > 0 only couple to slots with
// y_0 > 0, where the initial data already vanishes.
std::vector<double> propagate(const DualGeneratorMatrix& gen,
                              const std::vector<double>& h0, double t);

struct TrueEvolutionSolution {
  DualGeneratorMatrix gen;
  std::vector<double> h;

  double value(const OccupationState& y) const;
};

TrueEvolutionSolution solve_true_evolution(const Params& p, const ParticleConfig& x0,
                                           int k, double t);

// E prod_i q^{x_{n_i}(t) + n_i} for the step initial condition (or x0).
double exact_moment(const Params& p, const MultiIndex& n, double t);
double exact_moment(const Params& p, const MultiIndex& n, double t,
                    const ParticleConfig& x0);

struct DualityReport {
  double max_generator_residual = 0.0;   // |L^qP_x H - L^dual_y H| / scale
  double max_identity_residual = 0.0;    // four component identities of the proof
  double max_markov_decomp_residual = 0.0;  // |L^qP H - L^dualMarkov H - C H| / scale
  int trials = 0;
};

// Randomized check of the generator duality and its component identities.
DualityReport verify_duality_identity(const Params& p, int trials, std::uint64_t seed);

}  // namespace qpush
