#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qpush/qfunctions.hpp"

namespace qpush {

// Model parameters.  q in (0,1); R, L >= 0 and not both zero; particle
// speeds a_i > 0.
struct Params {
  double q = 0.5;
  double R = 1.0;
  double L = 1.0;
  std::vector<double> a;

  int N() const { return static_cast<int>(a.size()); }
  void validate() const;  // throws std::invalid_argument naming the violated constraint

  static Params make(double q, double R, double L, std::vector<double> a);
};

// Ordered particle configuration x_1 > x_2 > ... > x_N with virtual
// sentinels x_0 = +inf and x_{N+1} = -inf.
struct ParticleConfig {
  std::vector<std::int64_t> x;

  int N() const { return static_cast<int>(x.size()); }
  bool valid() const;
  // Step initial condition x_i = -i.
  static ParticleConfig step(int N);
};

// Occupation vector (y_0, ..., y_N) of nonnegative integers.
struct OccupationState {
  std::vector<std::int64_t> y;

  int N() const { return static_cast<int>(y.size()) - 1; }
  std::int64_t level() const;
  bool valid() const;
  // y^{j,i}: one unit moved from slot j to slot i (requires y_j >= 1; i <= j).
  OccupationState moved(int j, int i) const;
};

using MultiIndex = std::vector<int>;

// N >= n_1 >= ... >= n_k >= 0.
bool is_weyl(const MultiIndex& n, int N);
// Enumerates all of W^{k,N}.
std::vector<MultiIndex> weyl_chamber(int k, int N);

struct Move {
  enum class Kind { RightJump, LeftBlock };
  Kind kind;
  int initiator;  // particle whose jump triggers the move (i of the text)
  int last;       // last particle of the left-moving block (j of the text); == initiator for right jumps
  double rate;
};

// gap_i = x_{i-1} - x_i - 1; entry 0 of the result is gap_1 = +inf sentinel.
std::vector<std::int64_t> gaps(const ParticleConfig& cfg);

ParticleConfig apply_move(const ParticleConfig& cfg, const Move& mv);

// H(x,y) = prod_i q^{(x_i+i) y_i}; zero whenever y_0 > 0.
double observable_H(double q, const ParticleConfig& cfg, const OccupationState& y);

// y_i(n) = #{j : n_j = i} and its inverse on the Weyl chamber.
OccupationState index_to_occupation(const MultiIndex& n, int N);
MultiIndex occupation_to_index(const OccupationState& y);

// All moves with positive rate out of cfg.
std::vector<Move> enumerate_moves(const Params& p, const ParticleConfig& cfg);

using ConfigFn = std::function<double(const ParticleConfig&)>;
using OccupationFn = std::function<double(const OccupationState&)>;

double apply_generator_pushasep(const Params& p, const ConfigFn& f, const ParticleConfig& cfg);
double apply_generator_dual(const Params& p, const OccupationFn& g, const OccupationState& y);
double apply_generator_dual_markov(const Params& p, const OccupationFn& g, const OccupationState& y);

// C(y) = (L^dual 1)(y) = sum_i L a_i^{-1} (q^{-y_i-...-y_N} - 1).
double exit_rate_C(const Params& p, const OccupationState& y);

}  // namespace qpush
