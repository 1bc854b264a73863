#include "leelab/elliptic.hpp"

#include "leelab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>

namespace leelab::elliptic {

using torus::codifferential;
using torus::gradient;
using torus::inner;
using Mask = exterior::Mask;

namespace {

double norm(const ScalarField& f) { return std::sqrt(torus::dot(f, f)); }

void axpy(ScalarField& y, double a, const ScalarField& x) {
  auto yv = y.values();
  const auto xv = x.values();
  for (std::size_t i = 0; i < yv.size(); ++i) yv[i] += a * xv[i];
}

ScalarField drift_component(const FieldForm& b, int axis) { return b.coefficient(Mask{1} << axis); }

}  // namespace

DriftOperator::DriftOperator(FieldForm drift, std::optional<ScalarField> potential)
    : drift_(std::move(drift)), has_potential_(potential.has_value()) {
  if (drift_.degree() != 1) fail(ErrorCode::invalid_argument, "drift must be a 1-form");
  potential_ = potential ? *potential : ScalarField(drift_.grid(), 0.0);
  if (!(potential_.grid() == drift_.grid())) fail(ErrorCode::dimension_mismatch, "potential on another grid");
  for (int a = 0; a < grid().axes(); ++a) mean_drift_.push_back(drift_component(drift_, a).mean());
  mean_potential_ = potential_.mean();
}

DriftOperator DriftOperator::drift_laplacian(const FieldForm& theta0) { return DriftOperator(theta0); }

DriftOperator DriftOperator::flat_u(const FieldForm& theta) {
  return DriftOperator(theta * -1.0, codifferential(theta).coefficient(0));
}

DriftOperator DriftOperator::gauduchon(const ConformalMetric& m) {
  const double a = m.n() - 1;
  const FieldForm dphi = gradient(m.log_factor());
  const ScalarField lap = codifferential(dphi).coefficient(0);
  ScalarField v = (lap - torus::norm_sq(dphi) * a) * a;
  return DriftOperator(dphi * (-2.0 * a), std::move(v));
}

ScalarField DriftOperator::apply(const ScalarField& f) const {
  if (!transposed_) {
    ScalarField out = torus::laplacian(f) + inner(gradient(f), drift_);
    if (has_potential_) out += potential_ * f;
    return out;
  }
  // Exact discrete transpose: laplacian g - sum_a D_a(b_a g) + V g.
  ScalarField out = torus::laplacian(f);
  for (int a = 0; a < grid().axes(); ++a) out -= torus::partial(drift_component(drift_, a) * f, a);
  if (has_potential_) out += potential_ * f;
  return out;
}

DriftOperator DriftOperator::adjoint() const {
  DriftOperator out(*this);
  out.transposed_ = !transposed_;
  return out;
}

double DriftOperator::drift_divergence() const { return codifferential(drift_).coefficient(0).max_abs(); }

ScalarField DriftOperator::precondition(const ScalarField& f, double shift) const {
  const int nyquist = grid().points() / 2;
  const double sign = transposed_ ? -1.0 : 1.0;
  const double diag = mean_potential_ - shift;
  return torus::apply_symbol(f, [&](std::span<const int> k) {
    double k2 = 0.0;
    double drift = 0.0;
    for (std::size_t a = 0; a < k.size(); ++a) {
      k2 += static_cast<double>(k[a]) * k[a];
      if (k[a] != nyquist && k[a] != -nyquist) drift += mean_drift_[a] * k[a];
    }
    const std::complex<double> symbol(k2 + diag, sign * drift);
    if (std::abs(symbol) < 1e-13) return std::complex<double>(0.0);
    return 1.0 / symbol;
  });
}

ScalarField gmres(const DriftOperator& op, const ScalarField& rhs, double shift, const SolverOptions& opts,
                  SolveStats& stats) {
  const TorusGrid& grid = op.grid();
  const int m = std::max(1, opts.restart);
  auto a_times = [&](const ScalarField& x) {
    ScalarField y = op.apply(x);
    if (shift != 0.0) axpy(y, -shift, x);
    return y;
  };

  const double bnorm = norm(rhs);
  ScalarField x(grid, 0.0);
  stats = SolveStats{};
  if (bnorm == 0.0) return x;

  ScalarField r = rhs;
  double beta = bnorm;
  while (stats.iterations < opts.max_inner) {
    std::vector<ScalarField> v;
    v.reserve(m + 1);
    v.push_back(r * (1.0 / beta));
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m), sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    g(0) = beta;
    int j = 0;
    for (; j < m && stats.iterations < opts.max_inner; ++j) {
      ScalarField w = a_times(op.precondition(v[j], shift));
      for (int i = 0; i <= j; ++i) {
        h(i, j) = torus::dot(w, v[i]);
        axpy(w, -h(i, j), v[i]);
      }
      h(j + 1, j) = norm(w);
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * h(i, j) + sn(i) * h(i + 1, j);
        h(i + 1, j) = -sn(i) * h(i, j) + cs(i) * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      cs(j) = denom == 0.0 ? 1.0 : h(j, j) / denom;
      sn(j) = denom == 0.0 ? 0.0 : h(j + 1, j) / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      ++stats.iterations;
      stats.history.push_back(std::abs(g(j + 1)) / bnorm);
      const double hn = norm(w);
      if (std::abs(g(j + 1)) <= opts.tolerance * bnorm || hn == 0.0) {
        ++j;
        break;
      }
      v.push_back(w * (1.0 / hn));
    }
    const Eigen::VectorXd y = h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    ScalarField update(grid, 0.0);
    for (int i = 0; i < j; ++i) axpy(update, y(i), v[i]);
    x += op.precondition(update, shift);
    r = rhs - a_times(x);
    beta = norm(r);
    if (beta <= opts.tolerance * bnorm) break;
  }
  stats.residual = beta / bnorm;
  return x;
}

DriftSolution solve_drift(const DriftOperator& op, const ScalarField& rhs, const SolverOptions& opts) {
  if (op.has_potential()) fail(ErrorCode::invalid_argument, "solve_drift expects an operator without potential");
  if (!(rhs.grid() == op.grid())) fail(ErrorCode::dimension_mismatch, "rhs lives on another grid");
  DriftSolution out;
  const double rhs_norm = norm(rhs);
  if (rhs_norm == 0.0) {
    out.solution = ScalarField(op.grid(), 0.0);
    return out;
  }

  // Left kernel: constants when the drift is co-closed on the grid.
  const double scale = std::max(1.0, op.drift().max_abs());
  ScalarField left = op.drift_divergence() <= 1e-12 * scale ? ScalarField(op.grid(), 1.0)
                                                            : kernel_vector(op.adjoint(), opts).v1;
  const double pairing = torus::dot(left, rhs);
  out.fredholm_defect = std::abs(pairing) / (norm(left) * rhs_norm);
  if (out.fredholm_defect > opts.fredholm_tolerance) {
    fail(ErrorCode::non_solvable, "rhs is not in the range of the operator (normalized pairing with the left kernel " +
                                      std::to_string(out.fredholm_defect) + ")");
  }
  ScalarField projected = rhs;
  axpy(projected, -pairing / torus::dot(left, left), left);

  ScalarField x = gmres(op, projected, 0.0, opts, out.stats);
  x += -x.mean();
  const ScalarField residual = op.apply(x) - projected;
  out.stats.residual = norm(residual) / norm(projected);
  if (out.stats.residual > 1e-10) {
    fail(ErrorCode::no_convergence, "drift solve stalled at relative residual " + std::to_string(out.stats.residual) +
                                        " after " + std::to_string(out.stats.iterations) + " iterations");
  }
  out.solution = std::move(x);
  return out;
}

KernelSpectrum kernel_vector(const DriftOperator& op, const SolverOptions& opts) {
  const TorusGrid& grid = op.grid();
  KernelSpectrum out;
  ScalarField v(grid, 1.0);
  double lambda = 0.0;
  double res = 0.0;
  for (int it = 0; it < opts.max_outer; ++it) {
    SolveStats stats;
    ScalarField w = gmres(op, v, opts.shift, opts, stats);
    if (w.mean() < 0.0) w *= -1.0;
    w *= 1.0 / w.rms();
    const ScalarField kw = op.apply(w);
    lambda = torus::dot(w, kw) / torus::dot(w, w);
    ScalarField r = kw;
    axpy(r, -lambda, w);
    res = r.rms();
    const double change = (w - v).rms();
    v = std::move(w);
    out.iterations = it + 1;
    if (res <= 1e-11 || change <= 1e-14) break;
  }
  if (res > 1e-8) {
    fail(ErrorCode::no_convergence, "inverse iteration did not converge (residual " + std::to_string(res) + ")");
  }
  out.lambda1 = lambda;
  out.residual = res;
  out.v1 = std::move(v);
  return out;
}

KernelSpectrum kernel_spectrum(const DriftOperator& op, const SolverOptions& opts) {
  KernelSpectrum out = kernel_vector(op, opts);
  const TorusGrid& grid = op.grid();
  const int m = std::max(4, opts.arnoldi_steps);

  // Once the ground direction enters the basis the shifted solves have
  // solutions of size 1/|shift|, so full-precision residuals are out of reach.
  SolverOptions inner = opts;
  inner.tolerance = std::max(opts.tolerance, 1e-10);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  ScalarField q(grid);
  for (double& x : q.values()) x = gauss(rng);
  std::vector<ScalarField> basis;
  basis.push_back(q * (1.0 / norm(q)));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  int steps = 0;
  for (int j = 0; j < m; ++j) {
    SolveStats stats;
    ScalarField w = gmres(op, basis[j], opts.shift, inner, stats);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const double c = torus::dot(w, basis[i]);
        h(i, j) += c;
        axpy(w, -c, basis[i]);
      }
    }
    h(j + 1, j) = norm(w);
    steps = j + 1;
    if (h(j + 1, j) < 1e-14) break;
    basis.push_back(w * (1.0 / h(j + 1, j)));
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(steps, steps), false);
  std::vector<std::complex<double>> lambdas;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> mu = es.eigenvalues()(i);
    if (std::abs(mu) < 1e-300) continue;
    lambdas.push_back(opts.shift + 1.0 / mu);
  }
  std::sort(lambdas.begin(), lambdas.end(),
            [](const auto& a, const auto& b) { return std::abs(a) < std::abs(b); });
  // Skip the Ritz value that reproduces the ground state.
  const double tol = 1e-6 * std::max(1.0, std::abs(out.lambda1));
  for (const auto& l : lambdas) {
    if (std::abs(l - out.lambda1) > tol) {
      out.lambda2 = l.real();
      out.lambda2_imag = l.imag();
      break;
    }
  }
  out.gap = out.lambda2 - out.lambda1;
  return out;
}

GauduchonResult gauduchon_factor(const ConformalMetric& m, const SolverOptions& opts) {
  const DriftOperator op = DriftOperator::gauduchon(m);
  GauduchonResult out;
  out.spectrum = kernel_spectrum(op, opts);
  ScalarField q = out.spectrum.v1;
  out.min_factor = q.min();
  out.positive = out.min_factor > 0.0;
  out.near_degenerate = out.spectrum.gap < 0.1;
  const double a = m.n() - 1;
  if (out.positive) {
    out.gauduchon = ConformalMetric(m.log_factor() + q.map([a](double v) { return std::log(v) / a; }), true);
    q = ((out.gauduchon.log_factor() - m.log_factor()) * a).exp();
  } else {
    out.gauduchon = m;
  }
  out.residual = op.apply(q).rms() / q.rms();
  out.factor = std::move(q);
  return out;
}

double refined_residual(const ConformalMetric& m, const ScalarField& factor, int points) {
  const ConformalMetric fine(torus::interpolate(m.log_factor(), points), false);
  const ScalarField q = torus::interpolate(factor, points);
  return DriftOperator::gauduchon(fine).apply(q).rms() / q.rms();
}

DistinguishedResult distinguished_factor(const ConformalMetric& background, const FieldForm& theta0,
                                         std::optional<double> k_override, bool synthetic,
                                         const SolverOptions& opts) {
  const TorusGrid& grid = background.grid();
  if (!(theta0.grid() == grid) || theta0.degree() != 1) {
    fail(ErrorCode::dimension_mismatch, "drift must be a 1-form on the background grid");
  }
  if (!background.normalized()) fail(ErrorCode::not_normalized, "background metric must have volume one");
  const ScalarField& phi0 = background.log_factor();
  const double spread = phi0.max() - phi0.min();
  if (spread > 1e-6 * std::max(1.0, std::abs(phi0.mean()))) {
    fail(ErrorCode::invalid_argument, "background must be flat up to a constant scale");
  }
  const int n = grid.n();
  const double a = n - 1;
  const double lambda = std::exp(phi0.mean());
  const double scale = std::max(1.0, theta0.max_abs());
  const ScalarField div = codifferential(theta0).coefficient(0);
  const bool co_closed = div.max_abs() <= 1e-8 * scale;
  if (!co_closed && !synthetic) {
    fail(ErrorCode::not_gauduchon, "background Lee form is not co-closed (max |d* theta0| = " +
                                       std::to_string(div.max_abs()) + ")");
  }

  DistinguishedResult out;
  out.synthetic = synthetic;
  const ScalarField theta_sq = torus::norm_sq(theta0);
  out.k0 = torus::quadrature(theta_sq * (1.0 / lambda), background);
  if (theta0.max_abs() == 0.0 && (!k_override || *k_override == 0.0)) {
    out.balanced = true;
    out.phi = ScalarField(grid, 0.0);
    out.distinguished = background;
    return out;
  }

  const DriftOperator op = DriftOperator::drift_laplacian(theta0);
  // (n-1) L_0 phi + |theta0|^2 + d* theta0 = lambda k in flat units.
  const ScalarField source = theta_sq + div;
  if (k_override) {
    out.k = *k_override;
  } else if (op.drift_divergence() <= 1e-12 * scale) {
    out.k = source.mean() / lambda;
  } else {
    const ScalarField left = kernel_vector(op.adjoint(), opts).v1;
    out.k = torus::dot(left, source) / (lambda * torus::dot(left, ScalarField(grid, 1.0)));
  }
  const ScalarField rhs = (source * -1.0 + lambda * out.k) * (1.0 / a);
  // A right-hand side at roundoff level (harmonic drift) has the zero solution.
  if (rhs.rms() <= 1e-13 * (source.rms() + lambda * std::abs(out.k))) {
    out.phi = ScalarField(grid, 0.0);
  } else {
    DriftSolution sol = solve_drift(op, rhs, opts);
    out.phi = std::move(sol.solution);
    out.stats = sol.stats;
    out.equation_residual = sol.stats.residual;
  }

  const ScalarField expected = (-out.phi).exp() * out.k;
  auto defect = [&](const ScalarField& f) {
    const double denom = expected.rms();
    return (f - expected).rms() / (denom > 0.0 ? denom : 1.0);
  };
  const FieldForm dphi = gradient(out.phi);
  const ScalarField display =
      ((codifferential(dphi).coefficient(0) + inner(dphi, theta0)) * a + source) * (-out.phi).exp() *
      (1.0 / lambda);
  out.f_display_defect = defect(display);

  const ConformalMetric omega(phi0 + out.phi, false);
  const FieldForm theta = theta0 + dphi * a;
  out.f_direct_defect = defect(omega.norm_sq(theta) + torus::conformal_codiff_1form(theta, omega));
  out.distinguished = ConformalMetric(phi0 + out.phi, true);
  return out;
}

FieldForm co_closed_part(const FieldForm& theta) {
  const ScalarField h = torus::inverse_laplacian(codifferential(theta).coefficient(0));
  return theta - gradient(h);
}

}  // namespace leelab::elliptic
