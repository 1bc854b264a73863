#include <doctest.h>

#include "leelab/error.hpp"
#include "leelab/invariant.hpp"

#include <random>

using namespace leelab::invariant;
using leelab::exterior::Basis;
using leelab::exterior::kI;
using leelab::exterior::Mask;
using leelab::exterior::phi;
using leelab::exterior::phi_bar;
using leelab::exterior::wedge;

namespace {

Form random_form(int n, int degree, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Form f(n, degree);
  for (Mask m : Basis::get(n).masks(degree)) f.set(m, Complex(gauss(rng), gauss(rng)));
  return f;
}

Eigen::MatrixXcd random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = Complex(gauss(rng), gauss(rng));
  return b;
}

InvariantMetric random_metric(int n, std::mt19937_64& rng) {
  const Eigen::MatrixXcd b = random_matrix(n, rng);
  return InvariantMetric(b * b.adjoint() + 0.3 * Eigen::MatrixXcd::Identity(n, n));
}

// Hodge-star formula for the codifferential on an even-dimensional manifold.
Form star_codifferential(const Form& a, const InvariantModel& m) {
  const auto& g = m.metric();
  return -g.hodge_star(m.algebra().d(g.hodge_star(a)));
}

}  // namespace

TEST_CASE("Inoue structure equations") {
  const auto alg = inoue_sm_algebra();
  CHECK((alg.d(phi(2, 2)) - wedge(phi(2, 2), phi_bar(2, 2)) * (-kI)).max_abs() < 1e-15);
  CHECK(alg.d(alg.d(phi(2, 1))).max_abs() < 1e-15);
  CHECK(alg.jacobi_defect() < 1e-15);
  CHECK(alg.unimodularity_defect() < 1e-15);
}

TEST_CASE("Inoue dOmega for general parameters") {
  const double r = 1.1, s = 0.8;
  const Complex u(0.2, -0.35);
  const auto model = inoue_sm(r, s, u);
  const Form d_omega = model.algebra().d(model.omega());
  const int n = 2;
  const Form p1 = phi(n, 1), p2 = phi(n, 2), b1 = phi_bar(n, 1), b2 = phi_bar(n, 2);
  const Form expected = wedge(wedge(p1, p2), b1) * (r * r) + wedge(wedge(p1, p2), b2) * (kI / 2.0 * u) +
                        wedge(wedge(p1, b1), b2) * (r * r) -
                        wedge(wedge(p2, b1), b2) * (kI / 2.0 * std::conj(u));
  CHECK((d_omega - expected).max_abs() < 1e-14);
}

TEST_CASE("Inoue Lee form for general parameters") {
  for (const Complex u : {Complex(0.0), Complex(0.3, 0.1), Complex(-0.5, 0.4)}) {
    const double r = 1.2, s = 0.9;
    const auto model = inoue_sm(r, s, u);
    const Form theta = lee_form(model);
    const double den = r * r * s * s - std::norm(u);
    const Complex c1 = 3.0 * r * r * u / (2.0 * den);
    const Complex c2 = kI * (2.0 * r * r * s * s + std::norm(u)) / (2.0 * den);
    CHECK(std::abs(theta.coefficient(0b0001) - c1) < 1e-12);
    CHECK(std::abs(theta.coefficient(0b0010) - c2) < 1e-12);
    CHECK(std::abs(theta.coefficient(0b0100) - std::conj(c1)) < 1e-12);
    CHECK(std::abs(theta.coefficient(0b1000) - std::conj(c2)) < 1e-12);
    CHECK(theta.is_real(1e-12));
  }
}

TEST_CASE("Inoue at u = 0") {
  const double r = 1.7, s = 0.6;
  const auto model = inoue_sm(r, s, 0.0);
  const auto& alg = model.algebra();
  const auto& g = model.metric();
  const Form theta = lee_form(model);
  CHECK((theta - (phi(2, 2) - phi_bar(2, 2)) * kI).max_abs() < 1e-14);
  CHECK(g.norm_sq(theta) == doctest::Approx(2.0 / (s * s)).epsilon(1e-12));

  const Form djt = alg.d(leelab::exterior::apply_J(theta));
  // The sign of this component depends on the J convention; see the README.
  CHECK((djt - wedge(phi(2, 2), phi_bar(2, 2)) * (-2.0 * kI)).max_abs() < 1e-14);
  CHECK(g.norm_sq(djt) == doctest::Approx(4.0 / std::pow(s, 4)).epsilon(1e-12));
  CHECK(g.lambda(djt).coefficient(0).real() == doctest::Approx(-2.0 / (s * s)).epsilon(1e-12));

  const Densities dens = functional_densities(model);
  CHECK(std::abs(dens.g) < 1e-14);
  CHECK(std::abs(dens.r) < 1e-14);
  CHECK(dens.f == doctest::Approx(4.0 / std::pow(s, 4)).epsilon(1e-12));
  CHECK(dens.a == doctest::Approx(2.0 / (s * s)).epsilon(1e-12));
  // Relative to phi1^phi2^phi1b^phi2b the volume coefficient is r^2 s^2.
  CHECK(dens.a * r * r * s * s == doctest::Approx(2.0 * r * r).epsilon(1e-12));

  const FOmega f = f_omega(model);
  CHECK(f.value() == doctest::Approx(2.0 / (s * s)).epsilon(1e-12));

  const ElResiduals el = el_residuals(model);
  CHECK(std::abs(el.g.constant) < 1e-14);
  CHECK(el.a.constant == doctest::Approx(2.0 / (s * s)).epsilon(1e-12));
  CHECK(el.g.deviation == 0.0);

  const auto rep = classify(model);
  CHECK(rep.gauduchon.holds);
  CHECK(rep.skt.holds);
  CHECK(rep.lck.holds);
  CHECK(rep.distinguished.holds);
  CHECK_FALSE(rep.balanced.holds);
  CHECK_FALSE(rep.kaehler.holds);
  CHECK(rep.lee_norm_sq == doctest::Approx(2.0 / (s * s)));
}

TEST_CASE("flat torus") {
  for (int n = 2; n <= 3; ++n) {
    const auto model = flat_torus(n);
    CHECK(lee_form(model).max_abs() == 0.0);
    const Densities d = functional_densities(model);
    CHECK(d.g == 0.0);
    CHECK(d.f == 0.0);
    CHECK(d.a == 0.0);
    CHECK(d.r == 0.0);
    CHECK(d.v == 0.0);
    CHECK(f_omega(model).value() == 0.0);
    const auto rep = classify(model);
    CHECK(rep.kaehler.holds);
    CHECK(rep.balanced.holds);
    CHECK(rep.lck.holds);
    CHECK(rep.locally_conformally_balanced.holds);
    CHECK(rep.skt.holds);
    CHECK(rep.gauduchon.holds);
    CHECK(rep.distinguished.holds);
    const auto el = el_residuals(model);
    CHECK(el.g.constant == 0.0);
    CHECK(el.f.constant == 0.0);
    CHECK(el.a.constant == 0.0);
    CHECK(el.r.constant == 0.0);
  }
}

TEST_CASE("Iwasawa manifold") {
  const auto model = iwasawa();
  const auto& alg = model.algebra();
  const Form omega = model.omega();
  CHECK(wedge(alg.d(omega), omega).max_abs() < 1e-14);
  const auto rep = classify(model);
  CHECK(rep.balanced.holds);
  CHECK(rep.distinguished.holds);
  CHECK(rep.gauduchon.holds);
  CHECK(rep.locally_conformally_balanced.holds);
  CHECK_FALSE(rep.lck.holds);
  CHECK_FALSE(rep.kaehler.holds);
  CHECK(f_omega(model).value() == 0.0);

  // Hand expansion: d^c Omega = J d Omega for the 2-form, and
  // dd^c Omega = 2 phi1^phi2^phi1b^phi2b.
  const int n = 3;
  const Form expected =
      wedge(wedge(wedge(phi(n, 1), phi(n, 2)), phi_bar(n, 1)), phi_bar(n, 2)) * Complex(2.0);
  CHECK((alg.d(d_c(omega, alg)) - expected).max_abs() < 1e-14);
  CHECK_FALSE(rep.skt.holds);
}

TEST_CASE("d^c on functions and constants") {
  const auto alg = inoue_sm_algebra();
  CHECK(d_c(Form::constant(2, 3.0), alg).max_abs() == 0.0);
  const Form omega = inoue_sm(1.0, 1.0, 0.0).omega();
  CHECK(alg.d(d_c(omega, alg)).max_abs() < 1e-14);
}

TEST_CASE("codifferential") {
  std::mt19937_64 rng(31);
  const auto algebras = {inoue_sm_algebra(), kodaira_algebra(), iwasawa_algebra(),
                         product(inoue_sm_algebra(), CoframeAlgebra::abelian(1))};
  for (const auto& alg0 : algebras) {
    const int n = alg0.n();
    const auto alg = alg0.transformed(random_matrix(n, rng) + 2.0 * Eigen::MatrixXcd::Identity(n, n));
    const InvariantModel model(alg, random_metric(n, rng));
    CHECK(codifferential(Form::constant(n, 1.0), model).max_abs() == 0.0);
    for (int k = 1; k <= 2 * n; ++k) {
      const Form a = random_form(n, k, rng);
      const Form b = random_form(n, k - 1, rng);
      const auto& g = model.metric();
      const Form da = codifferential(a, model);
      CHECK(std::abs(g.inner_product(da, b) - g.inner_product(a, alg.d(b))) <
            1e-10 * std::max(1.0, a.max_abs() * b.max_abs() * 100));
      const Form via_star = star_codifferential(a, model);
      CHECK((da - via_star).max_abs() < 1e-9 * std::max(1.0, da.max_abs()));
    }
  }
}

TEST_CASE("Inoue models are Gauduchon") {
  const auto model = inoue_sm(0.9, 1.4, Complex(0.4, 0.2));
  CHECK(std::abs(codifferential(lee_form(model), model).coefficient(0)) < 1e-12);
}

TEST_CASE("transformed algebra preserves Jacobi and gives isometric models") {
  std::mt19937_64 rng(41);
  const auto alg = iwasawa_algebra();
  const Eigen::MatrixXcd a = random_matrix(3, rng) + 2.0 * Eigen::MatrixXcd::Identity(3, 3);
  const auto t = alg.transformed(a);
  CHECK(t.jacobi_defect() < 1e-10);
  // Pull the identity metric back: h' = A^{-T} h conj(A^{-1}).
  const Eigen::MatrixXcd inv = a.inverse();
  const Eigen::MatrixXcd h = inv.transpose() * inv.conjugate();
  const InvariantModel m1(alg, InvariantMetric::identity(3));
  const InvariantModel m2(t, InvariantMetric(h));
  const Densities d1 = functional_densities(m1), d2 = functional_densities(m2);
  CHECK(d2.a == doctest::Approx(d1.a).epsilon(1e-10));
  CHECK(d2.r == doctest::Approx(d1.r).epsilon(1e-10));
  CHECK(d2.f == doctest::Approx(d1.f).epsilon(1e-10));
}

TEST_CASE("algebra validation") {
  using leelab::Error;
  using leelab::ErrorCode;
  const int n = 2;
  // d phi^1 = phi^1 ^ phi^2, d phi^2 = phi^1 ^ phi1b: d^2 phi^1 != 0.
  try {
    CoframeAlgebra::from_unbarred(n, {wedge(phi(n, 1), phi(n, 2)), wedge(phi(n, 1), phi_bar(n, 1))});
    FAIL("expected a Jacobi violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::jacobi_violation);
  }
  // Non-unimodular: d phi^1 = phi^1 ^ phi^2 alone (affine group type).
  try {
    CoframeAlgebra::from_unbarred(n, {wedge(phi(n, 1), phi(n, 2)), Form(n, 2)});
    FAIL("expected a unimodularity violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_unimodular);
  }
  CHECK_THROWS_AS((void)inoue_sm(1.0, 1.0, Complex(1.5, 0.0)), Error);
  CHECK_THROWS_AS((void)classify(flat_torus(2), 0.0), Error);
}

TEST_CASE("mixed-u density of |dOmega|^2") {
  const double r = 1.2, s = 0.9;
  const Complex u(0.3, 0.2);
  const auto model = inoue_sm(r, s, u);
  const double den = r * r * s * s - std::norm(u);
  // |dOmega|^2 Omega^2/2 relative to phi1^phi2^phi1b^phi2b.
  const double ours = functional_densities(model).a * den;
  // For n = 2, |dOmega|^2 = |theta|^2 independently of u.
  CHECK(ours == doctest::Approx(model.metric().norm_sq(lee_form(model)) * den).epsilon(1e-12));
  const double printed = (5.0 * r * r * std::norm(u) + 4.0 * std::pow(r, 4) * s * s) / (2.0 * den);
  CHECK(ours == doctest::Approx(printed).epsilon(1e-12));
}
