#pragma once

// Invariant Hermitian geometry on Lie coframes: d from structure constants,
// Gram-adjoint codifferentials, the Lee form and metric classification.

#include "leelab/exterior.hpp"

#include <vector>

namespace leelab::invariant {

using exterior::Complex;
using exterior::Form;
using exterior::InvariantMetric;

inline constexpr double kDefaultTolerance = 1e-9;

class CoframeAlgebra {
 public:
  /// d_generators[g] is d of generator g (all 2n of them). Enforces
  /// conjugation closure, d^2 = 0 and unimodularity.
  CoframeAlgebra(int n, std::vector<Form> d_generators, double tol = 1e-12);

  /// Fills the barred generators by conjugation.
  static CoframeAlgebra from_unbarred(int n, std::vector<Form> d_unbarred, double tol = 1e-12);
  static CoframeAlgebra abelian(int n);

  int n() const { return n_; }
  const Form& d_generator(int g) const { return d_generators_[g]; }
  std::span<const Form> d_generators() const { return d_generators_; }

  /// Matrix of d from degree k to degree k+1.
  const Eigen::MatrixXcd& d_matrix(int degree) const { return d_[degree]; }

  Form d(const Form& a) const;

  /// The same algebra written in the coframe psi = A phi.
  CoframeAlgebra transformed(const Eigen::MatrixXcd& a) const;

  double jacobi_defect() const;
  double unimodularity_defect() const;

 private:
  int n_;
  std::vector<Form> d_generators_;
  std::vector<Eigen::MatrixXcd> d_;
};

class InvariantModel {
 public:
  InvariantModel(CoframeAlgebra algebra, InvariantMetric metric);

  int n() const { return algebra_.n(); }
  const CoframeAlgebra& algebra() const { return algebra_; }
  const InvariantMetric& metric() const { return metric_; }
  const Form& omega() const { return omega_; }

 private:
  CoframeAlgebra algebra_;
  InvariantMetric metric_;
  Form omega_;
};

Form exterior_derivative(const Form& a, const CoframeAlgebra& alg);

/// d^c = -J^{-1} d J.
Form d_c(const Form& a, const CoframeAlgebra& alg);

/// Gram adjoint of d; on 0-forms returns the zero 0-form.
Form codifferential(const Form& a, const InvariantModel& model);

/// Gram adjoint of d d^c acting from degree k+2 down to degree k.
Form ddc_adjoint(const Form& a, const InvariantModel& model);

/// theta = Lambda(d Omega).
Form lee_form(const InvariantModel& model);

struct Densities {
  double g = 0.0;  // (d* theta)^2
  double f = 0.0;  // |d J theta|^2
  double a = 0.0;  // |d Omega|^2
  double r = 0.0;  // |d d^c Omega|^2
  double v = 0.0;  // |d theta|^2
};

Densities functional_densities(const InvariantModel& model);

/// Densities integrated against the total volume of the model.
Densities functional_values(const InvariantModel& model);

struct FOmega {
  double from_contraction = 0.0;  // Lambda(-dJ theta)
  double from_lee = 0.0;          // |theta|^2 + d* theta
  double value() const { return from_contraction; }
};

/// Both evaluations of f_Omega; throws convention_mismatch when they differ
/// by more than `tol` (relative to max(1, |f|)).
FOmega f_omega(const InvariantModel& model, double tol = 1e-10);

struct ElResidual {
  double constant = 0.0;
  double deviation = 0.0;
};

struct ElResiduals {
  ElResidual g, f, a, r;
};

/// Left-hand sides of the four Euler-Lagrange equations. On invariant models
/// they are constants, so every deviation is zero.
ElResiduals el_residuals(const InvariantModel& model);

struct Flag {
  bool holds = false;
  double residual = 0.0;
};

struct ClassificationReport {
  Flag kaehler, balanced, lck, locally_conformally_balanced, skt, gauduchon, distinguished;
  double lee_norm_sq = 0.0;
  double f_omega = 0.0;
  double tolerance = kDefaultTolerance;
};

ClassificationReport classify(const InvariantModel& model, double tol = kDefaultTolerance);

// Builders.

/// Inoue-Bombieri surface of type S_M in its standard invariant coframe.
CoframeAlgebra inoue_sm_algebra();
InvariantModel inoue_sm(double r, double s, Complex u, double c = 1.0);
/// The metric matrix of the Inoue family, sqrt(-1) r^2 phi1^phi1b + ... .
Eigen::MatrixXcd inoue_metric_matrix(double r, double s, Complex u);

InvariantModel flat_torus(int n);

/// Iwasawa manifold: d phi^1 = d phi^2 = 0, d phi^3 = phi^1 ^ phi^2; h = 1.
CoframeAlgebra iwasawa_algebra();
InvariantModel iwasawa();

/// Primary Kodaira surface: d phi^1 = 0, d phi^2 = phi^1 ^ conj(phi^1).
CoframeAlgebra kodaira_algebra();

/// Direct sum of two algebras (generators of `a` first).
CoframeAlgebra product(const CoframeAlgebra& a, const CoframeAlgebra& b);

}  // namespace leelab::invariant
