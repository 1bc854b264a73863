#pragma once

// Periodic fields on the flat torus (R/2piZ)^{2n} with Fourier differentiation.
// Forms use the real orthonormal coframe dx_1..dx_n, dy_1..dy_n: bit a < n of
// a Mask is dx_{a+1}, bit n + a is dy_{a+1}. The complex structure is
// J dx = dy, J dy = -dx, so phi^j = (dx_j + i dy_j)/sqrt(2) is of type (1,0)
// and the flat fundamental form is sum dx_j ^ dy_j.

#include "leelab/exterior.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace leelab::torus {

using exterior::Mask;

/// Point-count cap for a single grid (2^22 doubles per field, 32 MiB).
inline constexpr std::size_t kMaxPoints = std::size_t{1} << 22;

class TorusGrid {
 public:
  TorusGrid() = default;
  TorusGrid(int n, int points_per_axis);

  int n() const { return n_; }
  int axes() const { return 2 * n_; }
  int points() const { return points_; }
  std::size_t size() const { return size_; }
  double spacing() const;
  /// (2 pi)^{2n}, the flat volume.
  double volume() const;

  /// Multi-index of a flat point index; axis 0 varies slowest.
  std::vector<int> multi_index(std::size_t flat) const;
  std::vector<double> coordinates(std::size_t flat) const;

  friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

 private:
  int n_ = 0;
  int points_ = 0;
  std::size_t size_ = 0;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const TorusGrid& grid, double value = 0.0);
  ScalarField(const TorusGrid& grid, std::vector<double> values);

  /// Samples fn at the grid points; fn receives (x_1..x_n, y_1..y_n).
  static ScalarField sample(const TorusGrid& grid,
                            const std::function<double(std::span<const double>)>& fn);

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  double mean() const;
  double max_abs() const;
  double min() const;
  double max() const;
  /// Root mean square.
  double rms() const;

  ScalarField map(const std::function<double(double)>& fn) const;
  ScalarField exp() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(const ScalarField& o);
  ScalarField& operator+=(double s);
  ScalarField& operator*=(double s);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
  friend ScalarField operator+(ScalarField a, double s) { return a += s; }
  friend ScalarField operator-(ScalarField a, double s) { return a += -s; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator-(ScalarField a) { return a *= -1.0; }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

/// Sum of a_i b_i in index order (compensated).
double dot(const ScalarField& a, const ScalarField& b);

// Spectral calculus. First derivatives drop the Nyquist mode; the Laplacian
// uses the full symbol |k|^2.

ScalarField partial(const ScalarField& f, int axis);
/// Geometer's Laplacian -sum of second derivatives.
ScalarField laplacian(const ScalarField& f);
/// Trigonometric interpolation onto a finer (or equal) grid of the same n.
ScalarField interpolate(const ScalarField& f, int points_per_axis);
/// Drop the Fourier modes with |k_a| > cutoff on any axis.
ScalarField low_pass(const ScalarField& f, int cutoff);
/// Multiplies each Fourier coefficient by symbol(k), k the signed wave vector.
/// The symbol must satisfy symbol(-k) = conj(symbol(k)).
ScalarField apply_symbol(const ScalarField& f,
                         const std::function<std::complex<double>(std::span<const int>)>& symbol);
/// Mean-zero solution of laplacian(u) = f - mean(f).
ScalarField inverse_laplacian(const ScalarField& f);

class FieldForm {
 public:
  FieldForm() = default;
  FieldForm(const TorusGrid& grid, int degree);
  static FieldForm scalar(const ScalarField& f);

  const TorusGrid& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  int degree() const { return degree_; }
  const exterior::Basis& basis() const { return exterior::Basis::get(grid_.n()); }

  const ScalarField& coefficient(Mask m) const;
  ScalarField& coefficient(Mask m);
  std::span<const ScalarField> coefficients() const { return coeffs_; }

  double max_abs() const;
  /// Constant-coefficient form at one grid point, written in the complex coframe.
  exterior::Form at(std::size_t point) const;

  FieldForm& operator+=(const FieldForm& o);
  FieldForm& operator-=(const FieldForm& o);
  FieldForm& operator*=(double s);
  FieldForm& operator*=(const ScalarField& f);

  friend FieldForm operator+(FieldForm a, const FieldForm& b) { return a += b; }
  friend FieldForm operator-(FieldForm a, const FieldForm& b) { return a -= b; }
  friend FieldForm operator*(FieldForm a, double s) { return a *= s; }
  friend FieldForm operator*(double s, FieldForm a) { return a *= s; }
  friend FieldForm operator*(FieldForm a, const ScalarField& f) { return a *= f; }
  friend FieldForm operator*(const ScalarField& f, FieldForm a) { return a *= f; }

 private:
  TorusGrid grid_;
  int degree_ = 0;
  std::vector<ScalarField> coeffs_;
};

/// A real constant-coefficient form over the complex coframe, written in the
/// real coframe; throws if `a` has a non-real part.
FieldForm from_complex(const TorusGrid& grid, const exterior::Form& a);

FieldForm d(const FieldForm& a);
FieldForm gradient(const ScalarField& f);
FieldForm apply_J(const FieldForm& a);
/// d^c = (-1)^k J d J on k-forms.
FieldForm d_c(const FieldForm& a);
FieldForm wedge(const FieldForm& a, const FieldForm& b);
/// Flat codifferential -sum_a e_a -| partial_a.
FieldForm codifferential(const FieldForm& a);
/// Adjoint of wedging with the flat fundamental form.
FieldForm lambda(const FieldForm& a);
FieldForm flat_fundamental_form(const TorusGrid& grid);

/// Pointwise flat inner product.
ScalarField inner(const FieldForm& a, const FieldForm& b);
ScalarField norm_sq(const FieldForm& a);

/// Omega = e^phi Omega_0 over the flat Kaehler torus.
class ConformalMetric {
 public:
  ConformalMetric() = default;
  ConformalMetric(ScalarField log_factor, bool normalize = true);

  const TorusGrid& grid() const { return log_factor_.grid(); }
  int n() const { return grid().n(); }
  const ScalarField& log_factor() const { return log_factor_; }
  bool normalized() const { return normalized_; }
  double volume() const;

  /// e^{-k phi} times the flat inner product of two k-forms.
  ScalarField inner(const FieldForm& a, const FieldForm& b) const;
  ScalarField norm_sq(const FieldForm& a) const { return inner(a, a); }
  FieldForm omega() const;
  /// Conformal to this metric with log factor phi + psi (normalized on request).
  ConformalMetric rescaled(const ScalarField& psi, bool normalize = true) const;

 private:
  ScalarField log_factor_;
  bool normalized_ = false;
};

/// The volume-normalization tolerance.
inline constexpr double kNormalizationTolerance = 1e-10;

FieldForm conformal_lee(const ConformalMetric& m);
/// d^{*Omega} alpha = e^{-phi}(d^{*0} alpha - (n-1) <d phi, alpha>_0).
ScalarField conformal_codiff_1form(const FieldForm& alpha, const ConformalMetric& m);
/// mean(f e^{n phi}) (2 pi)^{2n}.
double quadrature(const ScalarField& f, const ConformalMetric& m);

enum class Functional { G, F, A, R, V };
const char* functional_name(Functional which);

/// Pointwise density with respect to the Omega volume.
ScalarField functional_density(Functional which, const ConformalMetric& m);
/// Requires a normalized metric.
double functional_value(Functional which, const ConformalMetric& m);

/// One line per grid point: the 2n indices and the value, %.17g.
void write_csv(std::ostream& out, const ScalarField& f);
ScalarField read_csv(std::istream& in, const TorusGrid& grid);

}  // namespace leelab::torus
