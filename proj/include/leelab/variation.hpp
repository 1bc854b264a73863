#pragma once

// First and second variations of the conformal functionals: finite-difference
// derivatives along normalized paths, the weak-form pairings they should match,
// and sweeps of the invariant Inoue family.

#include "leelab/invariant.hpp"
#include "leelab/torus.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace leelab::variation {

using torus::ConformalMetric;
using torus::Functional;
using torus::ScalarField;

inline constexpr double kGapFloor = 1e-12;

/// Default Richardson steps, halving.
inline const std::vector<double>& default_steps() {
  static const std::vector<double> steps{1e-3, 5e-4, 2.5e-4};
  return steps;
}

struct VariationReport {
  Functional which = Functional::G;
  double fd_derivative = 0.0;  // extrapolated
  double el_pairing = 0.0;
  double relative_gap = 0.0;
  std::vector<double> steps;
  std::vector<double> central_differences;  // one per step
};

double relative_gap(double fd, double el, double floor = kGapFloor);

/// Throws invalid_argument unless the direction integrates to zero against
/// the volume of m (relative to the integral of its absolute value).
void require_mean_zero(const ScalarField& direction, const ConformalMetric& m);

/// Volume-one metric (1 + t direction) Omega.
ConformalMetric along_path(const ConformalMetric& m, const ScalarField& direction, double t);

/// Richardson-extrapolated central difference of the functional along the
/// normalized path; `differences` receives the raw central differences.
double fd_derivative(Functional which, const ConformalMetric& m, const ScalarField& direction,
                     const std::vector<double>& steps = default_steps(),
                     std::vector<double>* differences = nullptr);

/// Weak first variation integrated against the volume of m. Defined for G, F,
/// A and R.
double el_pairing(Functional which, const ConformalMetric& m, const ScalarField& direction);

VariationReport check_variation(Functional which, const ConformalMetric& m, const ScalarField& direction,
                                const std::vector<double>& steps = default_steps());

struct SecondVariation {
  double coefficient = 0.0;  // fitted t^2 coefficient
  double target = 0.0;       // integral of |dd^c direction|^2
  double relative_gap = 0.0;
  double fit_residual = 0.0; // rms misfit over max |F(t) - F(0)|
  std::vector<double> t;
  std::vector<double> increments;  // F(t) - F(0)
};

inline const std::vector<double>& default_second_variation_t() {
  static const std::vector<double> t{-0.03, -0.02, -0.01, 0.01, 0.02, 0.03};
  return t;
}

/// Surfaces only. Fits F(t) - F(0) = c t^2 + e t^3 and throws no_convergence
/// when the fit residual exceeds 1e-2.
SecondVariation second_variation_F(const ConformalMetric& m, const ScalarField& direction,
                                   const std::vector<double>& t = default_second_variation_t());

/// Gaussian noise low-passed to wave numbers |k_a| <= max_mode, shifted to
/// integrate to zero against the volume of m; unit rms.
ScalarField random_direction(const ConformalMetric& m, std::uint64_t seed, int max_mode = 2);

struct SweepRow {
  double r = 0.0, s = 0.0;
  exterior::Complex u;
  double c = 1.0;
  invariant::Densities values;
  invariant::ClassificationReport flags;
};

struct SweepSummary {
  bool f_monotone_decreasing = false;
  double f_smallest = 0.0;
  bool kaehler_attained = false;
  bool a_decreases_as_r_shrinks = false;
  std::string a_note;
};

struct Sweep {
  std::vector<SweepRow> rows;
  SweepSummary summary;
};

/// Inoue S_M rows with r chosen so that r^2 s^2 - |u|^2 = 1/c (unit volume).
/// Rows are ordered by s.
Sweep sweep_inoue(const std::vector<double>& s_values, exterior::Complex u = {}, double c = 1.0);

/// Worker count: LEELAB_THREADS when set, otherwise the hardware concurrency.
int thread_count();

/// Calls fn(i) for i in [0, count) on up to thread_count() threads. Results must
/// be written to per-index slots so the outcome does not depend on scheduling.
/// The first exception (by index) is rethrown.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace leelab::variation
