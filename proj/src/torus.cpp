#include "leelab/torus.hpp"

#include "leelab/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

namespace leelab::torus {

using exterior::Basis;
using exterior::wedge_sign;
using Complex = std::complex<double>;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int axes, int points, bool forward) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(axes, points, forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::vector<int> dims(axes, points);
    std::size_t real_size = 1;
    for (int a = 0; a < axes; ++a) real_size *= points;
    const std::size_t spec_size = real_size / points * (points / 2 + 1);
    double* in = fftw_alloc_real(real_size);
    fftw_complex* out = fftw_alloc_complex(spec_size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = forward ? fftw_plan_dft_r2c(axes, dims.data(), in, out, flags)
                             : fftw_plan_dft_c2r(axes, dims.data(), out, in, flags);
    fftw_free(in);
    fftw_free(out);
    if (!plan) fail(ErrorCode::invalid_argument, "FFTW could not plan the transform");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }
  std::mutex mutex_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

// Signed wave numbers of the half-complex layout, axis-major.
struct WaveTable {
  std::size_t spec_size = 0;
  std::vector<std::vector<int>> k;  // k[axis][spectral index]
};

std::shared_ptr<const WaveTable> wave_table(const TorusGrid& grid) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const WaveTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(grid.axes(), grid.points());
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  auto table = std::make_shared<WaveTable>();
  const int p = grid.points();
  const int axes = grid.axes();
  const int half = p / 2 + 1;
  table->spec_size = grid.size() / p * half;
  table->k.assign(axes, std::vector<int>(table->spec_size));
  std::vector<int> idx(axes, 0);
  for (std::size_t s = 0; s < table->spec_size; ++s) {
    for (int a = 0; a < axes; ++a) {
      const int j = idx[a];
      table->k[a][s] = (a == axes - 1 || j <= p / 2) ? j : j - p;
    }
    for (int a = axes - 1; a >= 0; --a) {
      const int extent = a == axes - 1 ? half : p;
      if (++idx[a] < extent) break;
      idx[a] = 0;
    }
  }
  cache.emplace(key, table);
  return table;
}

std::vector<Complex> forward(const ScalarField& f) {
  const auto& grid = f.grid();
  const auto table = wave_table(grid);
  std::vector<double> in(f.values().begin(), f.values().end());
  std::vector<Complex> out(table->spec_size);
  fftw_execute_dft_r2c(PlanCache::instance().get(grid.axes(), grid.points(), true), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

// Consumes the spectrum; includes the 1/N normalization.
ScalarField backward(const TorusGrid& grid, std::vector<Complex> spec) {
  std::vector<double> out(grid.size());
  fftw_execute_dft_c2r(PlanCache::instance().get(grid.axes(), grid.points(), false),
                       reinterpret_cast<fftw_complex*>(spec.data()), out.data());
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (double& v : out) v *= scale;
  return ScalarField(grid, std::move(out));
}

ScalarField derivative_from(const TorusGrid& grid, const std::vector<Complex>& spec, const WaveTable& table,
                            int axis) {
  const int nyquist = grid.points() / 2;
  std::vector<Complex> out(spec.size());
  const auto& k = table.k[axis];
  for (std::size_t s = 0; s < spec.size(); ++s) {
    const int ks = k[s];
    out[s] = (ks == nyquist || ks == -nyquist) ? Complex(0.0) : spec[s] * Complex(0.0, ks);
  }
  return backward(grid, std::move(out));
}

// Neumaier-compensated sum in index order.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
  if (!(a == b)) fail(ErrorCode::dimension_mismatch, "fields live on different grids");
}

int checked_degree(int degree, int n) {
  if (degree < 0 || degree > 2 * n) fail(ErrorCode::invalid_argument, "form degree out of range");
  return degree;
}

}  // namespace

TorusGrid::TorusGrid(int n, int points_per_axis) : n_(n), points_(points_per_axis) {
  if (n < 2 || n > exterior::kMaxN) {
    fail(ErrorCode::invalid_argument, "torus dimension n must be in [2, " + std::to_string(exterior::kMaxN) + "]");
  }
  if (points_per_axis < 8 || points_per_axis % 2) {
    fail(ErrorCode::invalid_argument, "points per axis must be even and at least 8");
  }
  double total = std::pow(static_cast<double>(points_per_axis), 2 * n);
  if (total > static_cast<double>(kMaxPoints)) {
    fail(ErrorCode::invalid_argument, "grid of " + std::to_string(points_per_axis) + "^" + std::to_string(2 * n) +
                                          " points exceeds the memory budget of " +
                                          std::to_string(kMaxPoints) + " points");
  }
  size_ = static_cast<std::size_t>(total);
}

double TorusGrid::spacing() const { return kTwoPi / points_; }

double TorusGrid::volume() const { return std::pow(kTwoPi, 2 * n_); }

std::vector<int> TorusGrid::multi_index(std::size_t flat) const {
  std::vector<int> idx(axes());
  for (int a = axes() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return idx;
}

std::vector<double> TorusGrid::coordinates(std::size_t flat) const {
  const auto idx = multi_index(flat);
  std::vector<double> x(axes());
  for (int a = 0; a < axes(); ++a) x[a] = idx[a] * spacing();
  return x;
}

ScalarField::ScalarField(const TorusGrid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.size()) fail(ErrorCode::dimension_mismatch, "value count does not match the grid");
}

ScalarField ScalarField::sample(const TorusGrid& grid, const std::function<double(std::span<const double>)>& fn) {
  ScalarField f(grid);
  std::vector<int> idx(grid.axes(), 0);
  std::vector<double> x(grid.axes(), 0.0);
  const double h = grid.spacing();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int a = 0; a < grid.axes(); ++a) x[a] = idx[a] * h;
    f.values_[i] = fn(x);
    for (int a = grid.axes() - 1; a >= 0; --a) {
      if (++idx[a] < grid.points()) break;
      idx[a] = 0;
    }
  }
  return f;
}

double ScalarField::mean() const {
  CompensatedSum sum;
  for (double v : values_) sum.add(v);
  return sum.value() / static_cast<double>(values_.size());
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::rms() const { return std::sqrt(dot(*this, *this) / static_cast<double>(values_.size())); }

ScalarField ScalarField::map(const std::function<double(double)>& fn) const {
  ScalarField out(*this);
  for (double& v : out.values_) v = fn(v);
  return out;
}

ScalarField ScalarField::exp() const {
  ScalarField out(*this);
  for (double& v : out.values_) v = std::exp(v);
  return out;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator+=(double s) {
  for (double& v : values_) v += s;
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double dot(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid());
  CompensatedSum sum;
  for (std::size_t i = 0; i < a.size(); ++i) sum.add(a[i] * b[i]);
  return sum.value();
}

ScalarField partial(const ScalarField& f, int axis) {
  const auto table = wave_table(f.grid());
  return derivative_from(f.grid(), forward(f), *table, axis);
}

ScalarField laplacian(const ScalarField& f) {
  const auto table = wave_table(f.grid());
  auto spec = forward(f);
  for (std::size_t s = 0; s < spec.size(); ++s) {
    double k2 = 0.0;
    for (const auto& k : table->k) k2 += static_cast<double>(k[s]) * k[s];
    spec[s] *= k2;
  }
  return backward(f.grid(), std::move(spec));
}

ScalarField interpolate(const ScalarField& f, int points_per_axis) {
  const TorusGrid& coarse = f.grid();
  if (points_per_axis < coarse.points()) fail(ErrorCode::invalid_argument, "interpolation only refines");
  const TorusGrid fine(coarse.n(), points_per_axis);
  const auto ct = wave_table(coarse);
  const auto ft = wave_table(fine);
  const auto spec = forward(f);
  const int nyquist = coarse.points() / 2;
  const int p = fine.points();
  const int half = p / 2 + 1;
  std::vector<Complex> out(ft->spec_size, Complex(0.0));
  for (std::size_t s = 0; s < spec.size(); ++s) {
    std::size_t target = 0;
    bool keep = true;
    for (int a = 0; a < coarse.axes(); ++a) {
      const int k = ct->k[a][s];
      if (k == nyquist || k == -nyquist) {
        keep = false;
        break;
      }
      const int extent = a == coarse.axes() - 1 ? half : p;
      target = target * extent + static_cast<std::size_t>(k >= 0 ? k : k + p);
    }
    if (keep) out[target] = spec[s];
  }
  ScalarField g = backward(fine, std::move(out));
  return g * (static_cast<double>(fine.size()) / static_cast<double>(coarse.size()));
}

ScalarField low_pass(const ScalarField& f, int cutoff) {
  const auto table = wave_table(f.grid());
  auto spec = forward(f);
  for (std::size_t s = 0; s < spec.size(); ++s) {
    for (const auto& k : table->k) {
      if (std::abs(k[s]) > cutoff) {
        spec[s] = 0.0;
        break;
      }
    }
  }
  return backward(f.grid(), std::move(spec));
}

ScalarField apply_symbol(const ScalarField& f, const std::function<Complex(std::span<const int>)>& symbol) {
  const auto table = wave_table(f.grid());
  auto spec = forward(f);
  std::vector<int> k(f.grid().axes());
  for (std::size_t s = 0; s < spec.size(); ++s) {
    for (int a = 0; a < f.grid().axes(); ++a) k[a] = table->k[a][s];
    spec[s] *= symbol(k);
  }
  return backward(f.grid(), std::move(spec));
}

ScalarField inverse_laplacian(const ScalarField& f) {
  return apply_symbol(f, [](std::span<const int> k) {
    double k2 = 0.0;
    for (int v : k) k2 += static_cast<double>(v) * v;
    return k2 == 0.0 ? Complex(0.0) : Complex(1.0 / k2);
  });
}

FieldForm::FieldForm(const TorusGrid& grid, int degree)
    : grid_(grid),
      degree_(checked_degree(degree, grid.n())),
      coeffs_(Basis::get(grid.n()).dimension(degree), ScalarField(grid)) {}

FieldForm FieldForm::scalar(const ScalarField& f) {
  FieldForm out(f.grid(), 0);
  out.coeffs_[0] = f;
  return out;
}

const ScalarField& FieldForm::coefficient(Mask m) const { return coeffs_[basis().index(m)]; }

ScalarField& FieldForm::coefficient(Mask m) { return coeffs_[basis().index(m)]; }

double FieldForm::max_abs() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, c.max_abs());
  return m;
}

exterior::Form FieldForm::at(std::size_t point) const {
  const int n = grid_.n();
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<exterior::Form> images;
  for (int j = 0; j < n; ++j) images.push_back((exterior::phi(n, j + 1) + exterior::phi_bar(n, j + 1)) * r);
  for (int j = 0; j < n; ++j) {
    images.push_back((exterior::phi(n, j + 1) - exterior::phi_bar(n, j + 1)) * Complex(0.0, -r));
  }
  exterior::Form real(n, degree_);
  const auto masks = basis().masks(degree_);
  for (std::size_t i = 0; i < masks.size(); ++i) real.set(masks[i], coeffs_[i][point]);
  return exterior::substitute(real, images);
}

FieldForm& FieldForm::operator+=(const FieldForm& o) {
  if (o.degree_ != degree_) fail(ErrorCode::dimension_mismatch, "adding forms of different degrees");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

FieldForm& FieldForm::operator-=(const FieldForm& o) {
  if (o.degree_ != degree_) fail(ErrorCode::dimension_mismatch, "subtracting forms of different degrees");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

FieldForm& FieldForm::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

FieldForm& FieldForm::operator*=(const ScalarField& f) {
  for (auto& c : coeffs_) c *= f;
  return *this;
}

FieldForm from_complex(const TorusGrid& grid, const exterior::Form& a) {
  const int n = grid.n();
  if (a.n() != n) fail(ErrorCode::dimension_mismatch, "form and grid dimensions differ");
  const double r = 1.0 / std::sqrt(2.0);
  // Generators of the output Form are read as dx_j (bit j) and dy_j (bit n + j).
  std::vector<exterior::Form> images;
  for (int j = 0; j < n; ++j) {
    images.push_back((exterior::Form::generator(n, j) + exterior::Form::generator(n, n + j) * Complex(0.0, 1.0)) * r);
  }
  for (int j = 0; j < n; ++j) {
    images.push_back((exterior::Form::generator(n, j) - exterior::Form::generator(n, n + j) * Complex(0.0, 1.0)) * r);
  }
  const exterior::Form real = exterior::substitute(a, images);
  FieldForm out(grid, a.degree());
  const auto masks = Basis::get(n).masks(a.degree());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const Complex c = real.coefficient(masks[i]);
    if (std::abs(c.imag()) > 1e-12 * std::max(1.0, a.max_abs())) {
      fail(ErrorCode::invalid_argument, "only real forms can be placed on the grid");
    }
    out.coefficient(masks[i]) = ScalarField(grid, c.real());
  }
  return out;
}

FieldForm d(const FieldForm& a) {
  const TorusGrid& grid = a.grid();
  const int k = a.degree();
  if (k == 2 * grid.n()) fail(ErrorCode::invalid_argument, "d of a top-degree form");
  FieldForm out(grid, k + 1);
  const auto table = wave_table(grid);
  const auto masks = a.basis().masks(k);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const Mask m = masks[i];
    const ScalarField& f = a.coefficients()[i];
    if (f.max_abs() == 0.0) continue;
    const auto spec = forward(f);
    for (int axis = 0; axis < grid.axes(); ++axis) {
      const Mask e = Mask{1} << axis;
      if (m & e) continue;
      ScalarField df = derivative_from(grid, spec, *table, axis);
      df *= static_cast<double>(wedge_sign(e, m));
      out.coefficient(m | e) += df;
    }
  }
  return out;
}

FieldForm gradient(const ScalarField& f) { return d(FieldForm::scalar(f)); }

FieldForm apply_J(const FieldForm& a) {
  const int n = a.n();
  FieldForm out(a.grid(), a.degree());
  const auto masks = a.basis().masks(a.degree());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    Mask acc = 0;
    int sign = 1;
    for (Mask rest = masks[i]; rest; rest &= rest - 1) {
      const int g = std::countr_zero(rest);
      const int image = g < n ? g + n : g - n;
      if (g >= n) sign = -sign;
      sign *= wedge_sign(acc, Mask{1} << image);
      acc |= Mask{1} << image;
    }
    out.coefficient(acc) = a.coefficients()[i] * static_cast<double>(sign);
  }
  return out;
}

FieldForm d_c(const FieldForm& a) {
  FieldForm out = apply_J(d(apply_J(a)));
  if (a.degree() % 2) out *= -1.0;
  return out;
}

FieldForm wedge(const FieldForm& a, const FieldForm& b) {
  require_same_grid(a.grid(), b.grid());
  const int deg = a.degree() + b.degree();
  if (deg > 2 * a.n()) fail(ErrorCode::invalid_argument, "wedge degree exceeds the top degree");
  FieldForm out(a.grid(), deg);
  const auto ma = a.basis().masks(a.degree());
  const auto mb = b.basis().masks(b.degree());
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (a.coefficients()[i].max_abs() == 0.0) continue;
    for (std::size_t j = 0; j < mb.size(); ++j) {
      const int s = wedge_sign(ma[i], mb[j]);
      if (s == 0 || b.coefficients()[j].max_abs() == 0.0) continue;
      ScalarField prod = a.coefficients()[i] * b.coefficients()[j];
      out.coefficient(ma[i] | mb[j]) += prod * static_cast<double>(s);
    }
  }
  return out;
}

FieldForm codifferential(const FieldForm& a) {
  const TorusGrid& grid = a.grid();
  const int k = a.degree();
  if (k == 0) return FieldForm(grid, 0);
  FieldForm out(grid, k - 1);
  const auto table = wave_table(grid);
  const auto masks = a.basis().masks(k);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const Mask m = masks[i];
    const ScalarField& f = a.coefficients()[i];
    if (f.max_abs() == 0.0) continue;
    const auto spec = forward(f);
    for (Mask rest = m; rest; rest &= rest - 1) {
      const int axis = std::countr_zero(rest);
      const Mask e = Mask{1} << axis;
      ScalarField df = derivative_from(grid, spec, *table, axis);
      df *= -static_cast<double>(wedge_sign(e, m & ~e));
      out.coefficient(m & ~e) += df;
    }
  }
  return out;
}

FieldForm lambda(const FieldForm& a) {
  const int n = a.n();
  const int k = a.degree();
  if (k < 2) return FieldForm(a.grid(), 0);
  FieldForm out(a.grid(), k - 2);
  const auto masks = a.basis().masks(k);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    for (int j = 0; j < n; ++j) {
      const Mask pair = (Mask{1} << j) | (Mask{1} << (n + j));
      if ((masks[i] & pair) != pair) continue;
      const Mask rest = masks[i] & ~pair;
      out.coefficient(rest) += a.coefficients()[i] * static_cast<double>(wedge_sign(pair, rest));
    }
  }
  return out;
}

FieldForm flat_fundamental_form(const TorusGrid& grid) {
  FieldForm out(grid, 2);
  for (int j = 0; j < grid.n(); ++j) {
    out.coefficient((Mask{1} << j) | (Mask{1} << (grid.n() + j))) = ScalarField(grid, 1.0);
  }
  return out;
}

ScalarField inner(const FieldForm& a, const FieldForm& b) {
  if (a.degree() != b.degree()) fail(ErrorCode::dimension_mismatch, "inner product of forms of different degrees");
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.coefficients().size(); ++i) {
    out += a.coefficients()[i] * b.coefficients()[i];
  }
  return out;
}

ScalarField norm_sq(const FieldForm& a) { return inner(a, a); }

ConformalMetric::ConformalMetric(ScalarField log_factor, bool normalize) : log_factor_(std::move(log_factor)) {
  for (double v : log_factor_.values()) {
    if (!std::isfinite(v)) fail(ErrorCode::invalid_argument, "log conformal factor must be finite");
  }
  if (normalize) log_factor_ += -std::log(volume()) / n();
  normalized_ = std::abs(volume() - 1.0) <= kNormalizationTolerance;
}

double ConformalMetric::volume() const {
  return (log_factor_ * static_cast<double>(n())).exp().mean() * grid().volume();
}

ScalarField ConformalMetric::inner(const FieldForm& a, const FieldForm& b) const {
  ScalarField w = (log_factor_ * static_cast<double>(-a.degree())).exp();
  return torus::inner(a, b) * w;
}

FieldForm ConformalMetric::omega() const { return flat_fundamental_form(grid()) * log_factor_.exp(); }

ConformalMetric ConformalMetric::rescaled(const ScalarField& psi, bool normalize) const {
  return ConformalMetric(log_factor_ + psi, normalize);
}

FieldForm conformal_lee(const ConformalMetric& m) { return gradient(m.log_factor()) * static_cast<double>(m.n() - 1); }

ScalarField conformal_codiff_1form(const FieldForm& alpha, const ConformalMetric& m) {
  if (alpha.degree() != 1) fail(ErrorCode::invalid_argument, "conformal codifferential expects a 1-form");
  const FieldForm dphi = gradient(m.log_factor());
  ScalarField out = codifferential(alpha).coefficient(0) - inner(dphi, alpha) * static_cast<double>(m.n() - 1);
  return out * (-m.log_factor()).exp();
}

double quadrature(const ScalarField& f, const ConformalMetric& m) {
  const ScalarField w = (m.log_factor() * static_cast<double>(m.n())).exp();
  return dot(f, w) / static_cast<double>(f.size()) * m.grid().volume();
}

const char* functional_name(Functional which) {
  switch (which) {
    case Functional::G: return "G";
    case Functional::F: return "F";
    case Functional::A: return "A";
    case Functional::R: return "R";
    case Functional::V: return "V";
  }
  return "?";
}

ScalarField functional_density(Functional which, const ConformalMetric& m) {
  switch (which) {
    case Functional::G: {
      const ScalarField q = conformal_codiff_1form(conformal_lee(m), m);
      return q * q;
    }
    case Functional::F: return m.norm_sq(d(apply_J(conformal_lee(m))));
    case Functional::A: return m.norm_sq(d(m.omega()));
    case Functional::R: return m.norm_sq(d(d_c(m.omega())));
    case Functional::V: return m.norm_sq(d(conformal_lee(m)));
  }
  fail(ErrorCode::invalid_argument, "unknown functional");
}

double functional_value(Functional which, const ConformalMetric& m) {
  if (!m.normalized()) {
    fail(ErrorCode::not_normalized, "functional values need a volume-one metric (volume " +
                                        std::to_string(m.volume()) + ")");
  }
  return quadrature(functional_density(which, m), m);
}

void write_csv(std::ostream& out, const ScalarField& f) {
  const TorusGrid& grid = f.grid();
  const int n = grid.n();
  for (int j = 1; j <= n; ++j) out << "ix" << j << ',';
  for (int j = 1; j <= n; ++j) out << "iy" << j << ',';
  out << "value\n";
  char buf[64];
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int idx : grid.multi_index(i)) out << idx << ',';
    std::snprintf(buf, sizeof buf, "%.17g", f[i]);
    out << buf << '\n';
  }
}

ScalarField read_csv(std::istream& in, const TorusGrid& grid) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::malformed_file, "empty field CSV");
  ScalarField f(grid);
  std::vector<bool> seen(grid.size(), false);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t flat = 0;
    for (int a = 0; a < grid.axes(); ++a) {
      if (!std::getline(ss, cell, ',')) fail(ErrorCode::malformed_file, "short CSV row: " + line);
      int idx = 0;
      try {
        idx = std::stoi(cell);
      } catch (const std::exception&) {
        fail(ErrorCode::malformed_file, "bad index in CSV row: " + line);
      }
      if (idx < 0 || idx >= grid.points()) fail(ErrorCode::malformed_file, "index out of range: " + line);
      flat = flat * grid.points() + static_cast<std::size_t>(idx);
    }
    if (!std::getline(ss, cell, ',')) fail(ErrorCode::malformed_file, "missing value: " + line);
    double v = 0.0;
    try {
      v = std::stod(cell);
    } catch (const std::exception&) {
      fail(ErrorCode::malformed_file, "bad value in CSV row: " + line);
    }
    if (!std::isfinite(v)) fail(ErrorCode::malformed_file, "non-finite value: " + line);
    if (seen[flat]) fail(ErrorCode::malformed_file, "duplicate grid point: " + line);
    seen[flat] = true;
    f[flat] = v;
    ++rows;
  }
  if (rows != grid.size()) {
    fail(ErrorCode::malformed_file, "CSV has " + std::to_string(rows) + " rows, grid needs " +
                                        std::to_string(grid.size()));
  }
  return f;
}

}  // namespace leelab::torus
