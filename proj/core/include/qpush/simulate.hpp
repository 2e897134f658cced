#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "qpush/model.hpp"

namespace qpush {

struct Trajectory {
  ParticleConfig initial;
  double horizon = 0.0;
  std::vector<std::pair<double, Move>> events;  // strictly increasing times
};

// Exact event-driven simulation up to time t.  Right jumps carry per-particle
// exponential clocks at rate R a_i (1 - q^{gap_i}); a left jump of particle j
// triggers a cascade of Bernoulli pushes with probabilities q^{gap} read from
// the pre-jump configuration.  Deterministic given the engine state.
ParticleConfig sample_pushasep(const Params& p, const ParticleConfig& x0, double t,
                               std::mt19937_64& rng, Trajectory* record = nullptr);

struct McOptions {
  std::int64_t nsamples = 10000;
  std::uint64_t seed = 1;
  int threads = 0;   // 0 = hardware concurrency
  int chunks = 128;  // fixed decomposition; results do not depend on `threads`
};

struct MomentEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(nsamples)
  std::int64_t nsamples = 0;
};

struct ComplexMomentEstimate {
  std::complex<double> mean{0.0, 0.0};
  double stderr_ = 0.0;
  std::int64_t nsamples = 0;
};

// Monte Carlo estimate of E prod_i q^{x_{n_i}(t)+n_i} from the step initial
// condition (or x0 when given).
MomentEstimate mc_moment(const Params& p, const MultiIndex& n, double t,
                         const McOptions& opt);
// One trajectory sweep shared across all requested indices.
std::vector<MomentEstimate> mc_moments(const Params& p, const std::vector<MultiIndex>& ns,
                                       double t, const McOptions& opt,
                                       const ParticleConfig* x0 = nullptr);

// Dual Markov process with the Feynman-Kac weight exp(int_0^t C(y(s)) ds);
// the integral is piecewise constant between jumps and accumulated exactly.
std::pair<OccupationState, double> sample_dual_weighted(const Params& p,
                                                        const OccupationState& y0,
                                                        double t, std::mt19937_64& rng);

// MC estimate of E^y [ H(x0, y(t)) exp(int_0^t C(y(s)) ds) ].
MomentEstimate mc_dual_duality_rhs(const Params& p, const ParticleConfig& x0,
                                   const OccupationState& y0, double t,
                                   const McOptions& opt);

// Triangular array lambda^{(k)}_j, 1 <= j <= k <= N, with
// lambda^{(k)}_j <= lambda^{(k-1)}_{j-1} <= lambda^{(k)}_{j-1}.
struct InterlacingArray {
  std::vector<std::vector<std::int64_t>> rows;  // rows[k-1] has k entries, j = 1..k

  int N() const { return static_cast<int>(rows.size()); }
  std::int64_t at(int k, int j) const {
    return rows[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)];
  }
  bool interlaced() const;
  // Leftmost-edge marginal x_n = lambda^{(n)}_n - n.
  std::vector<std::int64_t> leftmost_marginal() const;
  static InterlacingArray packed(int N);
};

// Two-dimensional dynamics started from the densely packed array.
InterlacingArray sample_array2d(const Params& p, double t, std::mt19937_64& rng);

// Mixed q-moments of the leftmost-edge marginal from the 2D dynamics.
std::vector<MomentEstimate> mc_array2d_moments(const Params& p,
                                               const std::vector<MultiIndex>& ns, double t,
                                               const McOptions& opt);

// MC estimate of E [ 1 / (zeta q^{x_n(t)+n}; q)_inf ]; zeta must avoid (0, inf).
ComplexMomentEstimate mc_qlaplace(const Params& p, int n_index, double t,
                                  std::complex<double> zeta, const McOptions& opt);

// Left-move count of the last particle over [0,t]; used by the Poisson
// domination check.
MomentEstimate mc_last_particle_left_moves(const Params& p, double t, const McOptions& opt);

}  // namespace qpush
