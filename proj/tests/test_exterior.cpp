#include <doctest.h>

#include "leelab/error.hpp"
#include "leelab/exterior.hpp"
#include "leelab/invariant.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

using namespace leelab::exterior;

namespace {

Form random_form(int n, int degree, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Form f(n, degree);
  for (Mask m : Basis::get(n).masks(degree)) f.set(m, Complex(gauss(rng), gauss(rng)));
  return f;
}

Eigen::MatrixXcd random_metric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = Complex(gauss(rng), gauss(rng));
  return b * b.adjoint() + 0.3 * Eigen::MatrixXcd::Identity(n, n);
}

// Parity of the permutation sorting `seq`, by counting inversions one pair at a time.
int inversion_sign(const std::vector<int>& seq) {
  int inversions = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j)
      if (seq[i] > seq[j]) ++inversions;
  return inversions % 2 ? -1 : 1;
}

}  // namespace

TEST_CASE("wedge of basis elements") {
  const int n = 2;
  const Form p12 = wedge(phi(n, 1), phi(n, 2));
  CHECK(p12.coefficient(0b0011) == Complex(1.0));
  CHECK(wedge(phi(n, 2), phi(n, 1)).coefficient(0b0011) == Complex(-1.0));

  std::mt19937_64 rng(3);
  const Form a = random_form(n, 1, rng);
  CHECK(wedge(a, a).max_abs() < 1e-14);

  const Form lhs = wedge(wedge(p12, phi_bar(n, 1)), phi_bar(n, 2));
  const Form rhs = wedge(wedge(wedge(phi(n, 1), phi_bar(n, 1)), phi(n, 2)), phi_bar(n, 2));
  CHECK((lhs + rhs).max_abs() < 1e-15);
  CHECK(lhs.coefficient(0b1111) == Complex(1.0));
}

TEST_CASE("wedge signs agree with inversion counting") {
  std::mt19937_64 rng(11);
  for (int n = 2; n <= 4; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<int> gens(2 * n);
      std::iota(gens.begin(), gens.end(), 0);
      std::shuffle(gens.begin(), gens.end(), rng);
      const int k = 1 + static_cast<int>(rng() % (2 * n));
      gens.resize(k);
      Form acc = Form::constant(n, 1.0);
      Mask m = 0;
      for (int g : gens) {
        acc = wedge(acc, Form::generator(n, g));
        m |= Mask{1} << g;
      }
      CHECK(acc.coefficient(m).real() == doctest::Approx(inversion_sign(gens)));
    }
  }
}

TEST_CASE("wedge is associative and graded commutative") {
  std::mt19937_64 rng(5);
  const int n = 3;
  const Form a = random_form(n, 1, rng), b = random_form(n, 2, rng), c = random_form(n, 2, rng);
  CHECK((wedge(wedge(a, b), c) - wedge(a, wedge(b, c))).max_abs() < 1e-12);
  const Form d = random_form(n, 3, rng);
  CHECK((wedge(a, d) + wedge(d, a)).max_abs() < 1e-12);
  CHECK((wedge(b, d) - wedge(d, b)).max_abs() < 1e-12);
  const Form e = random_form(n, 1, rng);
  CHECK((wedge(a, e) + wedge(e, a)).max_abs() < 1e-12);
}

TEST_CASE("conjugation") {
  std::mt19937_64 rng(7);
  const Form a = random_form(3, 3, rng);
  CHECK((a.conjugate().conjugate() - a).max_abs() < 1e-15);
  CHECK((a + a.conjugate()).is_real());
  const Form b = random_form(3, 2, rng);
  CHECK((wedge(a, b).conjugate() - wedge(a.conjugate(), b.conjugate())).max_abs() < 1e-12);
  // conj(phi^1 ^ phi^2) = conj(phi^1) ^ conj(phi^2)
  const Form p = wedge(phi(2, 1), phi(2, 2)).conjugate();
  CHECK(p.coefficient(0b1100) == Complex(1.0));
}

TEST_CASE("pq components") {
  const int n = 2;
  auto single = pq_components(wedge(phi(n, 1), phi_bar(n, 2)));
  REQUIRE(single.size() == 1);
  CHECK(single.count({1, 1}) == 1);

  const Form mixed = wedge(phi(n, 1), phi(n, 2)) + wedge(phi(n, 1), phi_bar(n, 2));
  auto parts = pq_components(mixed);
  CHECK(parts.size() == 2);
  CHECK(parts.count({2, 0}) == 1);
  CHECK(parts.count({1, 1}) == 1);

  std::mt19937_64 rng(2);
  const Form a = random_form(3, 3, rng);
  Form sum(3, 3);
  for (const auto& [pq, f] : pq_components(a)) {
    for (Mask m : Basis::get(3).masks(3)) {
      if (f.coefficient(m) != Complex(0.0)) CHECK(bidegree(m, 3) == pq);
    }
    sum += f;
  }
  CHECK((sum - a).max_abs() < 1e-15);
}

TEST_CASE("J action") {
  const int n = 2;
  CHECK((apply_J(phi(n, 1)) - phi(n, 1) * (-kI)).max_abs() < 1e-15);
  CHECK((apply_J(phi_bar(n, 1)) - phi_bar(n, 1) * kI).max_abs() < 1e-15);
  const Form p11 = wedge(phi(n, 1), phi_bar(n, 1));
  CHECK((apply_J(p11) - p11).max_abs() < 1e-15);
  CHECK((apply_J(apply_J(phi(n, 1))) + phi(n, 1)).max_abs() < 1e-15);

  std::mt19937_64 rng(9);
  const InvariantMetric g(random_metric(3, rng));
  for (int k = 0; k <= 6; ++k) {
    const Form a = random_form(3, k, rng);
    const double sign = k % 2 ? -1.0 : 1.0;
    CHECK((apply_J(apply_J(a)) - a * sign).max_abs() < 1e-12);
    CHECK((apply_J_inverse(apply_J(a)) - a).max_abs() < 1e-12);
    CHECK(g.norm(apply_J(a)) == doctest::Approx(g.norm(a)).epsilon(1e-12));
  }
}

TEST_CASE("inner products") {
  const int n = 2;
  const InvariantMetric flat = InvariantMetric::identity(n);
  CHECK(flat.inner_product(Form::constant(n, 1.0), Form::constant(n, 1.0)) == Complex(1.0));

  const double r = 1.3, s = 0.7;
  const InvariantMetric g(leelab::invariant::inoue_metric_matrix(r, s, 0.0));
  const Form p22 = wedge(phi(n, 2), phi_bar(n, 2));
  CHECK(g.norm_sq(p22) == doctest::Approx(1.0 / std::pow(s, 4)).epsilon(1e-12));
  CHECK(g.norm_sq(p22 * (2.0 * kI)) == doctest::Approx(4.0 / std::pow(s, 4)).epsilon(1e-12));
  CHECK(g.norm_sq(phi(n, 1)) == doctest::Approx(1.0 / (r * r)).epsilon(1e-12));

  std::mt19937_64 rng(21);
  for (int m = 2; m <= 4; ++m) {
    const InvariantMetric h(random_metric(m, rng));
    const Form omega = h.fundamental_form();
    CHECK(omega.is_real(1e-12));
    CHECK(pq_components(omega).size() == 1);
    CHECK(h.norm_sq(omega) == doctest::Approx(m).epsilon(1e-12));
  }
}

TEST_CASE("inner product of decomposable forms is a Gram determinant") {
  std::mt19937_64 rng(4);
  const int n = 3;
  const InvariantMetric g(random_metric(n, rng));
  const Form a1 = random_form(n, 1, rng), a2 = random_form(n, 1, rng);
  const Form b1 = random_form(n, 1, rng), b2 = random_form(n, 1, rng);
  const Complex det = g.inner_product(a1, b1) * g.inner_product(a2, b2) -
                      g.inner_product(a1, b2) * g.inner_product(a2, b1);
  CHECK(std::abs(g.inner_product(wedge(a1, a2), wedge(b1, b2)) - det) < 1e-10);
}

TEST_CASE("Hodge star") {
  std::mt19937_64 rng(13);
  for (int n = 2; n <= 3; ++n) {
    const InvariantMetric g(random_metric(n, rng));
    CHECK((g.hodge_star(Form::constant(n, 1.0)) - g.volume_form()).max_abs() < 1e-12);
    for (int k = 0; k <= 2 * n; ++k) {
      const Form a = random_form(n, k, rng);
      const Form b = random_form(n, k, rng);
      const Form lhs = wedge(b, g.hodge_star(a.conjugate()));
      const Form rhs = g.volume_form() * g.inner_product(b, a);
      CHECK((lhs - rhs).max_abs() < 1e-10 * std::max(1.0, rhs.max_abs()));
      const double sign = k % 2 ? -1.0 : 1.0;
      CHECK((g.hodge_star(g.hodge_star(a)) - a * sign).max_abs() < 1e-10 * a.max_abs());
      CHECK(std::abs(g.inner_product(a, b) -
                     std::conj(g.inner_product(g.hodge_star(b), g.hodge_star(a)))) < 1e-10);
    }
  }
  const InvariantMetric g2(random_metric(2, rng));
  CHECK((g2.hodge_star(g2.fundamental_form()) - g2.fundamental_form()).max_abs() < 1e-12);
  CHECK((g2.hodge_star(g2.hodge_star(phi(2, 1))) + phi(2, 1)).max_abs() < 1e-12);
}

TEST_CASE("Lambda is the adjoint of wedging with the fundamental form") {
  std::mt19937_64 rng(17);
  for (int n = 2; n <= 4; ++n) {
    const InvariantMetric g(random_metric(n, rng));
    const Form omega = g.fundamental_form();
    CHECK(g.lambda(omega).coefficient(0).real() == doctest::Approx(n).epsilon(1e-12));
    for (int k = 2; k <= 2 * n; ++k) {
      const Form a = random_form(n, k, rng);
      const Form b = random_form(n, k - 2, rng);
      CHECK(std::abs(g.inner_product(g.lambda(a), b) - g.inner_product(a, wedge(omega, b))) <
            1e-12 * std::max(1.0, a.max_abs() * b.max_abs() * 10));
    }
    const Form theta = random_form(n, 1, rng);
    CHECK((g.lambda(wedge(theta, omega)) - theta * double(n - 1)).max_abs() < 1e-12);
  }
  CHECK(InvariantMetric::identity(2).lambda(phi(2, 1)).max_abs() == 0.0);
}

TEST_CASE("volume form") {
  std::mt19937_64 rng(19);
  const Eigen::MatrixXcd h = random_metric(3, rng);
  const InvariantMetric g(h), g2(2.0 * h);
  const Mask top = Basis::get(3).top();
  CHECK(std::abs(g2.volume_form().coefficient(top) - 8.0 * g.volume_form().coefficient(top)) < 1e-10);
  CHECK((power(g.fundamental_form(), 3) * (1.0 / 6.0) - g.volume_form()).max_abs() < 1e-12);

  const InvariantMetric flat = InvariantMetric::identity(2);
  CHECK(flat.norm_sq(flat.volume_form()) == doctest::Approx(1.0));
  const InvariantMetric inoue(leelab::invariant::inoue_metric_matrix(1.2, 0.9, Complex(0.3, 0.1)), 2.5);
  CHECK(inoue.total_volume() == doctest::Approx((1.44 * 0.81 - 0.1) * 2.5).epsilon(1e-12));
}

TEST_CASE("surface star identity on 2-forms") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const InvariantMetric g(random_metric(2, rng));
    Form a = random_form(2, 2, rng);
    a = a + a.conjugate();
    auto parts = pq_components(a);
    const Form expected = g.fundamental_form() * g.lambda(a).coefficient(0) - parts[{1, 1}] +
                          parts[{2, 0}] + parts[{0, 2}];
    CHECK((g.hodge_star(a) - expected).max_abs() < 1e-10);
  }
}

TEST_CASE("metric validation") {
  Eigen::MatrixXcd bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS((void)InvariantMetric(bad), leelab::Error);
  Eigen::MatrixXcd nonherm(2, 2);
  nonherm << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS((void)InvariantMetric(nonherm), leelab::Error);
  CHECK_THROWS_AS((void)InvariantMetric(Eigen::MatrixXcd::Identity(2, 2), -1.0), leelab::Error);
}
