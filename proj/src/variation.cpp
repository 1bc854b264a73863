#include "leelab/variation.hpp"

#include "leelab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <random>
#include <thread>

namespace leelab::variation {

using torus::FieldForm;

double relative_gap(double fd, double el, double floor) {
  return std::abs(fd - el) / std::max({std::abs(fd), std::abs(el), floor});
}

void require_mean_zero(const ScalarField& direction, const ConformalMetric& m) {
  if (!(direction.grid() == m.grid())) fail(ErrorCode::dimension_mismatch, "direction lives on another grid");
  const double total = torus::quadrature(direction, m);
  const double scale = torus::quadrature(direction.map([](double v) { return std::abs(v); }), m);
  if (scale == 0.0 || std::abs(total) > 1e-10 * scale) {
    fail(ErrorCode::invalid_argument, "variation direction must be non-zero with zero mean against the volume (integral " +
                                          std::to_string(total) + ")");
  }
}

ConformalMetric along_path(const ConformalMetric& m, const ScalarField& direction, double t) {
  const ScalarField factor = direction * t + 1.0;
  if (factor.min() <= 0.0) fail(ErrorCode::invalid_argument, "path leaves the positive cone");
  return m.rescaled(factor.map([](double v) { return std::log(v); }), true);
}

namespace {

// Neville extrapolation to h = 0 in the variable h^2.
double extrapolate(const std::vector<double>& steps, std::vector<double> values) {
  const std::size_t k = steps.size();
  for (std::size_t level = 1; level < k; ++level) {
    for (std::size_t i = 0; i + level < k; ++i) {
      const double xi = steps[i] * steps[i];
      const double xj = steps[i + level] * steps[i + level];
      values[i] = (xi * values[i + 1] - xj * values[i]) / (xi - xj);
    }
  }
  return values[0];
}

}  // namespace

double fd_derivative(Functional which, const ConformalMetric& m, const ScalarField& direction,
                     const std::vector<double>& steps, std::vector<double>* differences) {
  require_mean_zero(direction, m);
  if (steps.empty()) fail(ErrorCode::invalid_argument, "no finite-difference steps");
  std::vector<double> central;
  for (double h : steps) {
    if (!(h > 0.0)) fail(ErrorCode::invalid_argument, "finite-difference steps must be positive");
    const double up = torus::functional_value(which, along_path(m, direction, h));
    const double down = torus::functional_value(which, along_path(m, direction, -h));
    central.push_back((up - down) / (2.0 * h));
  }
  if (differences) *differences = central;
  return extrapolate(steps, central);
}

double el_pairing(Functional which, const ConformalMetric& m, const ScalarField& direction) {
  const double n = m.n();
  const FieldForm dpsi = torus::gradient(direction);
  switch (which) {
    case Functional::G: {
      const FieldForm theta = torus::conformal_lee(m);
      const ScalarField q = torus::conformal_codiff_1form(theta, m);
      const ScalarField lap = torus::conformal_codiff_1form(dpsi, m);
      const ScalarField integrand =
          q * q * direction * (n - 2) + q * (lap - m.inner(dpsi, theta)) * (2 * (n - 1));
      return torus::quadrature(integrand, m);
    }
    case Functional::F: {
      const FieldForm djt = torus::d(torus::apply_J(torus::conformal_lee(m)));
      const FieldForm ddc = torus::d(torus::d_c(FieldForm::scalar(direction)));
      const ScalarField integrand = m.inner(djt, ddc) * (2 * (n - 1)) + m.norm_sq(djt) * direction * (n - 2);
      return torus::quadrature(integrand, m);
    }
    case Functional::A: {
      const FieldForm omega = m.omega();
      const FieldForm domega = torus::d(omega);
      const ScalarField integrand =
          m.inner(torus::wedge(dpsi, omega), domega) * 2.0 + m.norm_sq(domega) * direction * (n - 1);
      return torus::quadrature(integrand, m);
    }
    case Functional::R: {
      const FieldForm omega = m.omega();
      const FieldForm ddc = torus::d(torus::d_c(omega));
      const FieldForm ddc_var = torus::d(torus::d_c(omega * direction));
      const ScalarField integrand = m.norm_sq(ddc) * direction * (n - 4) + m.inner(ddc_var, ddc) * 2.0;
      return torus::quadrature(integrand, m);
    }
    case Functional::V: break;
  }
  fail(ErrorCode::invalid_argument, "no first-variation pairing for the Vaisman functional");
}

VariationReport check_variation(Functional which, const ConformalMetric& m, const ScalarField& direction,
                                const std::vector<double>& steps) {
  VariationReport out;
  out.which = which;
  out.steps = steps;
  out.fd_derivative = fd_derivative(which, m, direction, steps, &out.central_differences);
  out.el_pairing = el_pairing(which, m, direction);
  out.relative_gap = relative_gap(out.fd_derivative, out.el_pairing);
  return out;
}

SecondVariation second_variation_F(const ConformalMetric& m, const ScalarField& direction,
                                   const std::vector<double>& t) {
  if (m.n() != 2) fail(ErrorCode::invalid_argument, "the second variation of F is implemented for surfaces");
  require_mean_zero(direction, m);
  if (t.size() < 2) fail(ErrorCode::invalid_argument, "need at least two path parameters");
  SecondVariation out;
  out.t = t;
  const double base = torus::functional_value(Functional::F, m);
  Eigen::MatrixXd design(t.size(), 2);
  Eigen::VectorXd rhs(t.size());
  double largest = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double inc = torus::functional_value(Functional::F, along_path(m, direction, t[i])) - base;
    out.increments.push_back(inc);
    design(i, 0) = t[i] * t[i];
    design(i, 1) = t[i] * t[i] * t[i];
    rhs(i) = inc;
    largest = std::max(largest, std::abs(inc));
  }
  const Eigen::VectorXd fit = design.colPivHouseholderQr().solve(rhs);
  out.coefficient = fit(0);
  out.fit_residual = largest > 0.0 ? (design * fit - rhs).norm() / std::sqrt(double(t.size())) / largest : 0.0;

  const FieldForm ddc = torus::d(torus::d_c(FieldForm::scalar(direction)));
  out.target = torus::quadrature(m.norm_sq(ddc), m);
  out.relative_gap = relative_gap(out.coefficient, out.target);
  if (out.fit_residual > 1e-2) {
    fail(ErrorCode::no_convergence, "quadratic fit of F along the path is poor (residual " +
                                        std::to_string(out.fit_residual) + ")");
  }
  return out;
}

ScalarField random_direction(const ConformalMetric& m, std::uint64_t seed, int max_mode) {
  const torus::TorusGrid& grid = m.grid();
  if (max_mode < 1 || 2 * max_mode >= grid.points()) {
    fail(ErrorCode::invalid_argument, "random directions need 1 <= max_mode < points/2");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  ScalarField noise(grid);
  for (double& v : noise.values()) v = gauss(rng);
  ScalarField out = torus::low_pass(noise, max_mode);
  out += -torus::quadrature(out, m) / m.volume();
  return out * (1.0 / out.rms());
}

Sweep sweep_inoue(const std::vector<double>& s_values, exterior::Complex u, double c) {
  if (s_values.empty()) fail(ErrorCode::invalid_argument, "empty s range");
  if (!(c > 0.0)) fail(ErrorCode::invalid_argument, "volume constant must be positive");
  std::vector<double> s_sorted = s_values;
  std::sort(s_sorted.begin(), s_sorted.end());
  for (double s : s_sorted) {
    if (!(s > 0.0)) fail(ErrorCode::invalid_argument, "s must be positive");
  }
  Sweep out;
  out.rows.resize(s_sorted.size());
  parallel_for(static_cast<int>(s_sorted.size()), [&](int i) {
    SweepRow& row = out.rows[i];
    row.s = s_sorted[i];
    row.u = u;
    row.c = c;
    row.r = std::sqrt((1.0 / c + std::norm(u)) / (row.s * row.s));
    const invariant::InvariantModel model = invariant::inoue_sm(row.r, row.s, u, c);
    row.values = invariant::functional_values(model);
    row.flags = invariant::classify(model);
  });

  SweepSummary& sum = out.summary;
  sum.f_monotone_decreasing = true;
  sum.a_decreases_as_r_shrinks = true;
  sum.f_smallest = out.rows.front().values.f;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const SweepRow& row = out.rows[i];
    sum.f_smallest = std::min(sum.f_smallest, row.values.f);
    sum.kaehler_attained = sum.kaehler_attained || row.flags.kaehler.holds;
    if (i > 0) {
      sum.f_monotone_decreasing = sum.f_monotone_decreasing && row.values.f < out.rows[i - 1].values.f;
      sum.a_decreases_as_r_shrinks = sum.a_decreases_as_r_shrinks && row.values.a < out.rows[i - 1].values.a;
    }
  }
  sum.a_note = sum.a_decreases_as_r_shrinks
                   ? "A decreases as r -> 0 (s -> infinity) and grows as r -> infinity; its infimum along the "
                     "family is approached for small r"
                   : "A is not monotone in r along this sweep";
  return out;
}

int thread_count() {
  if (const char* env = std::getenv("LEELAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, 256));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::min(count, thread_count());
  std::vector<std::exception_ptr> errors(count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace leelab::variation
