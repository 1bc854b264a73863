#pragma once

// Linear elliptic machinery on grid conformal classes: drift Laplacians
// f -> laplacian f + <df, b> + V f, a Fourier-preconditioned GMRES solver,
// kernel/spectrum extraction and the Gauduchon and distinguished solves.

#include "leelab/torus.hpp"

#include <optional>
#include <vector>

namespace leelab::elliptic {

using torus::ConformalMetric;
using torus::FieldForm;
using torus::ScalarField;
using torus::TorusGrid;

struct SolverOptions {
  int restart = 60;
  int max_inner = 1000;     // Krylov iterations per linear solve
  int max_outer = 10000;    // inverse-iteration steps
  double tolerance = 1e-12; // relative residual of inner solves
  double shift = -1e-2;     // inverse-iteration shift
  int arnoldi_steps = 30;
  double fredholm_tolerance = 1e-9;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  // relative, recomputed from the returned solution
  std::vector<double> history;
};

class DriftOperator {
 public:
  DriftOperator(FieldForm drift, std::optional<ScalarField> potential = std::nullopt);

  /// L_0 f = laplacian f + <df, theta_0>.
  static DriftOperator drift_laplacian(const FieldForm& theta0);
  /// U q = laplacian q - <dq, theta> + q d* theta on the flat metric.
  static DriftOperator flat_u(const FieldForm& theta);
  /// e^phi U_Omega for Omega = e^phi Omega_0; its kernel is the Gauduchon factor.
  static DriftOperator gauduchon(const ConformalMetric& m);

  const TorusGrid& grid() const { return drift_.grid(); }
  const FieldForm& drift() const { return drift_; }
  const ScalarField& potential() const { return potential_; }
  bool has_potential() const { return has_potential_; }

  ScalarField apply(const ScalarField& f) const;
  /// The exact transpose of the discrete operator, which discretizes the flat
  /// L^2 adjoint g -> laplacian g - <dg, b> + (V + d* b) g.
  DriftOperator adjoint() const;
  bool transposed() const { return transposed_; }

  /// max |d* b|, zero when the drift is co-closed.
  double drift_divergence() const;

  /// Inverse of the constant-coefficient part (mean drift, mean potential,
  /// minus `shift`); modes where that symbol vanishes are zeroed.
  ScalarField precondition(const ScalarField& f, double shift) const;

 private:
  FieldForm drift_;
  ScalarField potential_;
  bool has_potential_ = false;
  bool transposed_ = false;
  std::vector<double> mean_drift_;
  double mean_potential_ = 0.0;
};

/// Right-preconditioned restarted GMRES for (op - shift) x = rhs.
ScalarField gmres(const DriftOperator& op, const ScalarField& rhs, double shift, const SolverOptions& opts,
                  SolveStats& stats);

struct DriftSolution {
  ScalarField solution;
  SolveStats stats;
  double fredholm_defect = 0.0;  // normalized pairing of rhs with the left kernel
};

/// Mean-zero solution of op(phi) = rhs. Throws non_solvable when rhs is not
/// orthogonal to the left kernel, no_convergence when the residual stays above
/// 1e-10 |rhs|.
DriftSolution solve_drift(const DriftOperator& op, const ScalarField& rhs, const SolverOptions& opts = {});

struct KernelSpectrum {
  double lambda1 = 0.0;
  double lambda2 = 0.0;       // real part of the next eigenvalue by modulus
  double lambda2_imag = 0.0;
  double gap = 0.0;           // Re(lambda2) - lambda1
  ScalarField v1;             // unit rms, positive mean
  int iterations = 0;
  double residual = 0.0;      // rms(op v1 - lambda1 v1)
};

/// Two eigenvalues of smallest modulus by shifted inverse iteration followed by
/// shift-invert Arnoldi.
KernelSpectrum kernel_spectrum(const DriftOperator& op, const SolverOptions& opts = {});

/// Ground vector only (no Arnoldi stage).
KernelSpectrum kernel_vector(const DriftOperator& op, const SolverOptions& opts = {});

struct GauduchonResult {
  ScalarField factor;         // q with q^{1/(n-1)} Omega Gauduchon and of volume one
  ConformalMetric gauduchon;  // that metric
  KernelSpectrum spectrum;
  double residual = 0.0;      // rms(op q) / rms(q)
  bool positive = false;
  double min_factor = 0.0;
  bool near_degenerate = false;
};

GauduchonResult gauduchon_factor(const ConformalMetric& m, const SolverOptions& opts = {});

/// Residual of the continuum problem estimated by interpolating the factor and
/// the log factor to a grid with `points` per axis.
double refined_residual(const ConformalMetric& m, const ScalarField& factor, int points);

struct DistinguishedResult {
  ScalarField phi;     // mean-zero, Omega = e^phi Omega_0
  double k = 0.0;      // constant used in the equation
  double k0 = 0.0;     // integral of |theta_0|^2 against the background volume
  bool balanced = false;
  bool synthetic = false;
  SolveStats stats;
  double equation_residual = 0.0;   // |L_0 phi - rhs| / |rhs|
  double f_display_defect = 0.0;    // conformal-law f against k e^{-phi}
  double f_direct_defect = 0.0;     // |theta|^2 + d* theta against k e^{-phi}
  ConformalMetric distinguished;    // e^phi Omega_0, volume-normalized
};

/// Background must be flat up to a constant scale and volume-normalized. Unless
/// `synthetic`, theta0 must be co-closed (otherwise throws not_gauduchon). A
/// k_override different from the solvable value throws non_solvable.
DistinguishedResult distinguished_factor(const ConformalMetric& background, const FieldForm& theta0,
                                         std::optional<double> k_override = std::nullopt,
                                         bool synthetic = false, const SolverOptions& opts = {});

/// theta minus the exact part d(laplacian^{-1} d* theta).
FieldForm co_closed_part(const FieldForm& theta);

}  // namespace leelab::elliptic
