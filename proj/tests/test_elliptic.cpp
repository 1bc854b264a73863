#include <doctest.h>

#include "leelab/elliptic.hpp"
#include "leelab/error.hpp"

#include <cmath>
#include <numbers>

using namespace leelab::elliptic;
using leelab::Error;
using leelab::ErrorCode;
using leelab::exterior::Mask;
namespace torus = leelab::torus;

namespace {

using Fn = double (*)(std::span<const double>);

ScalarField field(const TorusGrid& g, Fn fn) { return ScalarField::sample(g, fn); }

FieldForm one_form(const TorusGrid& g, int axis, const ScalarField& c) {
  FieldForm f(g, 1);
  f.coefficient(Mask{1} << axis) = c;
  return f;
}

ScalarField normalized_flat(const TorusGrid& g) { return ScalarField(g, -std::log(g.volume()) / g.n()); }

}  // namespace

TEST_CASE("drift solves with manufactured solutions") {
  const TorusGrid g(2, 16);
  const DriftOperator lap = DriftOperator::drift_laplacian(FieldForm(g, 1));
  CHECK(solve_drift(lap, ScalarField(g, 0.0)).solution.max_abs() == 0.0);

  const auto c2 = field(g, [](std::span<const double> x) { return std::cos(x[1]); });
  CHECK((solve_drift(lap, c2).solution - c2).max_abs() < 1e-10);

  const double a = 0.7;
  const DriftOperator l0 = DriftOperator::drift_laplacian(one_form(g, 0, ScalarField(g, a)));
  const auto rhs = ScalarField::sample(g, [a](std::span<const double> x) { return std::cos(x[0]) - a * std::sin(x[0]); });
  const auto sol = solve_drift(l0, rhs);
  CHECK((sol.solution - field(g, [](std::span<const double> x) { return std::cos(x[0]); })).max_abs() < 1e-10);
  CHECK(sol.stats.residual <= 1e-10);
  CHECK(std::abs(sol.solution.mean()) < 1e-14);
}

TEST_CASE("Fredholm dichotomy") {
  const TorusGrid g(2, 16);
  const FieldForm drift = one_form(g, 0, ScalarField(g, 0.5)) +
                          one_form(g, 0, field(g, [](std::span<const double> x) { return 0.3 * std::cos(x[1]); }));
  const DriftOperator l0 = DriftOperator::drift_laplacian(drift);
  const auto rhs = field(g, [](std::span<const double> x) { return std::sin(x[0] + x[3]) + 0.2 * std::cos(x[2]); });
  CHECK_NOTHROW(solve_drift(l0, rhs));
  try {
    solve_drift(l0, rhs + 0.01);
    FAIL("expected non_solvable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_solvable);
  }
}

TEST_CASE("adjoint and kernels") {
  const TorusGrid g(2, 12);
  FieldForm drift(g, 1);
  drift.coefficient(Mask{1} << 0) = field(g, [](std::span<const double> x) { return 0.4 + 0.3 * std::cos(x[1]); });
  drift.coefficient(Mask{1} << 3) = field(g, [](std::span<const double> x) { return 0.2 * std::sin(x[0] + x[2]); });
  const DriftOperator l0 = DriftOperator::drift_laplacian(drift);
  const DriftOperator l0s = l0.adjoint();
  const auto f = field(g, [](std::span<const double> x) { return std::exp(std::sin(x[0])) * std::cos(x[3]); });
  const auto h = field(g, [](std::span<const double> x) { return std::cos(x[1] - x[2]) + std::sin(2 * x[0]); });
  CHECK(torus::dot(l0.apply(f), h) == doctest::Approx(torus::dot(f, l0s.apply(h))).epsilon(1e-12));
  CHECK(l0.apply(ScalarField(g, 1.0)).max_abs() < 1e-12);
  CHECK(l0s.apply(ScalarField(g, 1.0)).max_abs() < 1e-12);
  // The discrete transpose discretizes laplacian g - <dg, b> + g d* b.
  const ScalarField cont = torus::laplacian(h) - torus::inner(torus::gradient(h), drift) +
                           h * torus::codifferential(drift).coefficient(0);
  CHECK((l0s.apply(h) - cont).max_abs() < 1e-8);
}

TEST_CASE("kernel spectrum of the flat Laplacian") {
  const TorusGrid g(2, 8);
  const auto spec = kernel_spectrum(DriftOperator::flat_u(FieldForm(g, 1)));
  CHECK(std::abs(spec.lambda1) < 1e-10);
  CHECK(spec.lambda2 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(spec.gap == doctest::Approx(1.0).epsilon(1e-8));
  CHECK((spec.v1 - ScalarField(g, 1.0)).max_abs() < 1e-12);
}

TEST_CASE("Gauduchon factor recovers the flat representative") {
  const TorusGrid g(2, 16);
  const ConformalMetric m(field(g, [](std::span<const double> x) { return 0.3 * std::cos(x[0]); }));
  const auto res = gauduchon_factor(m);
  CHECK(res.positive);
  CHECK(res.min_factor > 0.0);
  CHECK(std::abs(res.spectrum.lambda1) <= 1e-8);
  CHECK(res.spectrum.gap >= 0.5);
  const int n = 2;
  const ScalarField exact = ((normalized_flat(g) - m.log_factor()) * double(n - 1)).exp();
  CHECK((res.factor - exact).max_abs() / exact.max_abs() <= 1e-6);
  CHECK(res.gauduchon.normalized());
  const double rel8 = [] {
    const TorusGrid g8(2, 8);
    const ConformalMetric m8(ScalarField::sample(g8, [](std::span<const double> x) { return 0.3 * std::cos(x[0]); }));
    return refined_residual(m8, gauduchon_factor(m8).factor, 16);
  }();
  const double rel16 = refined_residual(m, res.factor, 32);
  CHECK(rel16 * 4 <= rel8);
  // The Gauduchon representative has co-closed Lee form.
  const auto q = torus::conformal_codiff_1form(torus::conformal_lee(res.gauduchon), res.gauduchon);
  CHECK(q.max_abs() < 1e-6);
}

TEST_CASE("Gauduchon factor in a flat class is constant") {
  const TorusGrid g(2, 8);
  const auto res = gauduchon_factor(ConformalMetric(ScalarField(g, 0.0)));
  CHECK(res.factor.max() - res.factor.min() < 1e-12);
  CHECK(res.spectrum.lambda2 == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("drifted kernel persists") {
  const TorusGrid g(2, 12);
  FieldForm theta(g, 1);
  theta.coefficient(Mask{1} << 1) = field(g, [](std::span<const double> x) { return 0.2 * std::cos(x[0]) + 0.1; });
  const auto spec = kernel_spectrum(DriftOperator::flat_u(theta));
  CHECK(std::abs(spec.lambda1) <= 1e-8);
  CHECK(spec.v1.min() > 0.0);
}

TEST_CASE("distinguished factor") {
  const TorusGrid g(2, 16);
  const ConformalMetric bg(normalized_flat(g));
  const double lambda = std::exp(bg.log_factor().mean());

  SUBCASE("balanced branch") {
    const auto res = distinguished_factor(bg, FieldForm(g, 1));
    CHECK(res.balanced);
    CHECK(res.k0 == 0.0);
    CHECK(res.phi.max_abs() == 0.0);
  }
  SUBCASE("harmonic drift") {
    const double a = 0.5;
    const auto res = distinguished_factor(bg, one_form(g, 0, ScalarField(g, a)));
    CHECK(res.phi.max_abs() < 1e-14);
    CHECK(res.k0 == doctest::Approx(a * a / lambda).epsilon(1e-12));
    CHECK(res.k == doctest::Approx(res.k0).epsilon(1e-12));
  }
  SUBCASE("manufactured drift") {
    const FieldForm theta0 = one_form(g, 0, field(g, [](std::span<const double> x) { return 0.5 + 0.3 * std::cos(x[1]); }));
    const auto res = distinguished_factor(bg, theta0);
    CHECK(res.phi.max_abs() > 1e-3);
    CHECK(res.equation_residual <= 1e-9);
    CHECK(res.f_display_defect <= 1e-8);
    CHECK(res.f_direct_defect <= 1e-8);
    CHECK(res.k == doctest::Approx(res.k0).epsilon(1e-12));
    CHECK(res.distinguished.normalized());
    try {
      distinguished_factor(bg, theta0, res.k0 * 1.01);
      FAIL("expected non_solvable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::non_solvable);
    }
  }
  SUBCASE("non co-closed drift") {
    const FieldForm theta0 = one_form(g, 0, field(g, [](std::span<const double> x) { return 0.5 + 0.3 * std::cos(x[0]); }));
    try {
      distinguished_factor(bg, theta0);
      FAIL("expected not_gauduchon");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::not_gauduchon);
    }
    const auto res = distinguished_factor(bg, theta0, std::nullopt, true);
    CHECK(res.synthetic);
    CHECK(res.f_display_defect <= 1e-8);
    CHECK(res.equation_residual <= 1e-9);
    CHECK(res.f_direct_defect <= 1e-8);

    const FieldForm projected = co_closed_part(theta0);
    CHECK(torus::codifferential(projected).coefficient(0).max_abs() < 1e-12);
    CHECK_NOTHROW(distinguished_factor(bg, projected));
  }
  SUBCASE("background must be flat") {
    const ConformalMetric curved(field(g, [](std::span<const double> x) { return 0.1 * std::cos(x[0]); }));
    CHECK_THROWS_AS((void)distinguished_factor(curved, FieldForm(g, 1)), Error);
  }
}
