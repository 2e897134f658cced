#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "qpush/model.hpp"

namespace qpush {

struct Circle {
  double center = 1.0;
  double radius = 0.5;
};

// Family of k circles; circles[0] carries z_1 (the contour that contains the
// q-scaled copies of all the others), circles[k-1] carries z_k.
struct ContourSpec {
  std::vector<Circle> circles;

  struct Certificate {
    bool contains_poles = false;   // every circle strictly contains every pole
    bool nested_q_scaled = false;  // circle A strictly contains q * circle B, B > A
    bool excludes_origin = false;  // radius < center for every circle
    bool ok() const { return contains_poles && nested_q_scaled && excludes_origin; }
  };
  Certificate certify(double q, const std::vector<double>& poles) const;

  int k() const { return static_cast<int>(circles.size()); }
};

struct QuadSpec {
  int points = 16;        // base points per contour; power of two, >= 16
  double tol = 1e-10;     // relative-change stopping tolerance
  int max_points = 4096;  // cap on the accepted per-contour refinement
  bool exploit_conjugate_symmetry = true;

  void validate() const;
};

// Poles of the moment integrand: the a_i, plus the dummy value 1 when any
// index beyond N is in play.
std::vector<double> default_poles(const Params& p, bool include_dummy = false);

// Concentric family centered at (min a + max a)/2 with the midpoint
// recursion outward.  Simple and certified, but its outermost circles pass
// within q^{k-1} * O(1) of the origin, which is numerically punishing when
// L > 0 (the integrand carries exp(t L (1/q - 1)/z)).
ContourSpec build_contours(const Params& p, int k,
                           const std::vector<double>& poles = {});

// Off-center family whose circles hug the q-scaled hull of the next contour
// from the left.  Keeps the closest approach to the origin near its
// theoretical maximum, which controls both quadrature resolution and
// floating-point cancellation for L > 0.
ContourSpec build_contours_hugging(const Params& p, int k,
                                   const std::vector<double>& poles = {});

struct ContourValue {
  std::complex<double> value{0.0, 0.0};
  double est_rel_error = 0.0;      // relative change of the last refinement
  std::vector<int> points_used;    // per contour
};

// Shared-grid evaluator for many moment indices at fixed (params, t, spec).
// Not thread safe; use one instance per thread.
class NestedContourIntegrator {
 public:
  NestedContourIntegrator(const Params& p, double t, const ContourSpec& spec,
                          const QuadSpec& quad, std::vector<double> poles = {});
  ~NestedContourIntegrator();
  NestedContourIntegrator(NestedContourIntegrator&&) noexcept;

  // Adaptive evaluation of the k-fold nested integral for multi-index n
  // (any point of Z^k_{>=0}; n.size() must equal spec.k()).
  ContourValue eval(const MultiIndex& n);

  // Evaluates a family of indices on one certified point profile, sharing
  // grids and inner partial sums.  The profile is certified against the
  // componentwise-max index of the batch.
  std::vector<ContourValue> eval_batch(const std::vector<MultiIndex>& ns);

  // Single evaluation at a fixed per-contour point profile (diagnostics).
  std::complex<double> eval_at(const MultiIndex& n, const std::vector<int>& points);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-off evaluation of E prod q^{x_{n_i}(t)+n_i} via the nested integral.
ContourValue moment_contour(const Params& p, const MultiIndex& n, double t,
                            const ContourSpec& spec, const QuadSpec& quad);

struct FreeConditionReport {
  double max_boundary_residual = 0.0;
  double max_cumulative_residual = 0.0;
  double max_free_eqn_residual = 0.0;
  double time_step = 0.0;
  int samples = 0;
};

// Samples multi-indices with a two-coordinate cluster (entries in 1..N+1, so
// the dummy speed a_n = 1 beyond N is exercised) and checks the boundary,
// cumulative and free-equation relations satisfied by the nested integral;
// residuals are relative to |m(t;n)|.  The time derivative uses a central
// difference with step h.
FreeConditionReport verify_free_conditions(const Params& p, double t, int k,
                                           const QuadSpec& quad, int nsamples,
                                           std::uint64_t seed, double h = 1e-4);

struct PartialSumReport {
  double max_deviation = 0.0;           // |S_n - 1/z|
  double max_recursion_residual = 0.0;  // |S_{n-1}(a_n - z)/a_n - (S_n - 1/a_n)|
};

// Telescoping identity S_n = 1/z over random complex z off {0} U {a_i}.
PartialSumReport partial_sum_identity_check(const std::vector<double>& a, int z_samples,
                                            std::uint64_t seed);

}  // namespace qpush
