#include "leelab/invariant.hpp"

#include "leelab/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace leelab::invariant {

using exterior::Basis;
using exterior::Mask;
using exterior::kI;

namespace {

double scalar_part(const Form& zero_form) { return zero_form.coefficients()[0].real(); }

}  // namespace

CoframeAlgebra::CoframeAlgebra(int n, std::vector<Form> d_generators, double tol)
    : n_(n), d_generators_(std::move(d_generators)) {
  const Basis& basis = Basis::get(n);
  if (static_cast<int>(d_generators_.size()) != 2 * n) {
    fail(ErrorCode::dimension_mismatch, "need d of all " + std::to_string(2 * n) + " generators");
  }
  double scale = 1.0;
  for (const auto& f : d_generators_) {
    if (f.n() != n || f.degree() != 2) {
      fail(ErrorCode::dimension_mismatch, "d of a generator must be a 2-form over the same coframe");
    }
    scale = std::max(scale, f.max_abs());
  }
  for (int j = 0; j < n; ++j) {
    if ((d_generators_[n + j] - d_generators_[j].conjugate()).max_abs() > tol * scale) {
      fail(ErrorCode::invalid_argument, "d of conj(phi^" + std::to_string(j + 1) +
                                            ") is not the conjugate of d phi^" + std::to_string(j + 1));
    }
  }

  // Leibniz: d(e_g ^ e_rest) = d e_g ^ e_rest - e_g ^ d e_rest, g the lowest generator.
  const int top = basis.generators();
  d_.resize(top + 1);
  std::vector<std::vector<Form>> images(top + 1);
  images[0].push_back(Form(n, 1));
  d_[0] = Eigen::MatrixXcd::Zero(basis.dimension(1), 1);
  for (int k = 1; k <= top; ++k) {
    const auto masks = basis.masks(k);
    for (const Mask m : masks) {
      if (k == top) {
        images[k].push_back(Form());
        continue;
      }
      const int g = std::countr_zero(m);
      const Mask rest = m & (m - 1);
      Form tail(n, k - 1);
      tail.set(rest, 1.0);
      const Form& d_tail = images[k - 1][basis.index(rest)];
      images[k].push_back(wedge(d_generators_[g], tail) - wedge(Form::generator(n, g), d_tail));
    }
    if (k < top) {
      d_[k] = Eigen::MatrixXcd::Zero(basis.dimension(k + 1), basis.dimension(k));
      for (std::size_t col = 0; col < masks.size(); ++col) {
        d_[k].col(static_cast<Eigen::Index>(col)) = images[k][col].to_vector();
      }
    } else {
      d_[k] = Eigen::MatrixXcd::Zero(1, 1);  // placeholder, never applied
    }
  }

  if (jacobi_defect() > tol * scale * scale) {
    fail(ErrorCode::jacobi_violation,
         "structure constants violate d^2 = 0 (defect " + std::to_string(jacobi_defect()) + ")");
  }
  if (unimodularity_defect() > tol * scale) {
    fail(ErrorCode::not_unimodular, "exact invariant top forms do not vanish (defect " +
                                        std::to_string(unimodularity_defect()) + ")");
  }
}

CoframeAlgebra CoframeAlgebra::from_unbarred(int n, std::vector<Form> d_unbarred, double tol) {
  if (static_cast<int>(d_unbarred.size()) != n) {
    fail(ErrorCode::dimension_mismatch, "need d of the n unbarred generators");
  }
  for (int j = 0; j < n; ++j) d_unbarred.push_back(d_unbarred[j].conjugate());
  return CoframeAlgebra(n, std::move(d_unbarred), tol);
}

CoframeAlgebra CoframeAlgebra::abelian(int n) {
  return CoframeAlgebra(n, std::vector<Form>(2 * n, Form(n, 2)));
}

Form CoframeAlgebra::d(const Form& a) const {
  if (a.n() != n_) fail(ErrorCode::dimension_mismatch, "form and algebra dimensions differ");
  if (a.degree() == 2 * n_) fail(ErrorCode::invalid_argument, "d of a top-degree form");
  return Form::from_vector(n_, a.degree() + 1, d_[a.degree()] * a.to_vector());
}

CoframeAlgebra CoframeAlgebra::transformed(const Eigen::MatrixXcd& a) const {
  if (a.rows() != n_ || a.cols() != n_) fail(ErrorCode::dimension_mismatch, "coframe change must be n x n");
  const Eigen::MatrixXcd inv = a.inverse();
  // phi^b = sum_c inv(b, c) psi^c
  std::vector<Form> images;
  for (int b = 0; b < n_; ++b) {
    Form img(n_, 1);
    for (int c = 0; c < n_; ++c) img.set(Mask{1} << c, inv(b, c));
    images.push_back(img);
  }
  for (int b = 0; b < n_; ++b) images.push_back(images[b].conjugate());

  std::vector<Form> d_new;
  for (int row = 0; row < n_; ++row) {
    Form acc(n_, 2);
    for (int b = 0; b < n_; ++b) acc += exterior::substitute(d_generators_[b], images) * a(row, b);
    d_new.push_back(acc);
  }
  return from_unbarred(n_, std::move(d_new));
}

double CoframeAlgebra::jacobi_defect() const {
  double defect = 0.0;
  if (n_ == 1) return defect;
  for (const auto& dg : d_generators_) defect = std::max(defect, d(dg).max_abs());
  return defect;
}

double CoframeAlgebra::unimodularity_defect() const {
  return d_[2 * n_ - 1].cwiseAbs().maxCoeff();
}

InvariantModel::InvariantModel(CoframeAlgebra algebra, InvariantMetric metric)
    : algebra_(std::move(algebra)), metric_(std::move(metric)), omega_(metric_.fundamental_form()) {
  if (algebra_.n() != metric_.n()) {
    fail(ErrorCode::dimension_mismatch, "metric dimension does not match the algebra");
  }
  if (algebra_.n() < 2) fail(ErrorCode::invalid_argument, "models need n >= 2");
}

Form exterior_derivative(const Form& a, const CoframeAlgebra& alg) { return alg.d(a); }

Form d_c(const Form& a, const CoframeAlgebra& alg) {
  // -J^{-1} on (k+1)-forms is (-1)^k J.
  Form out = exterior::apply_J(alg.d(exterior::apply_J(a)));
  if (a.degree() % 2) out *= -1.0;
  return out;
}

Form codifferential(const Form& a, const InvariantModel& model) {
  const int k = a.degree();
  if (k == 0) return Form(model.n(), 0);
  const Eigen::MatrixXcd adj = model.metric().adjoint(model.algebra().d_matrix(k - 1), k - 1, k);
  return Form::from_vector(model.n(), k - 1, adj * a.to_vector());
}

Form ddc_adjoint(const Form& a, const InvariantModel& model) {
  const int n = model.n();
  const int k = a.degree() - 2;
  if (k < 0) return Form(n, 0);
  const auto& alg = model.algebra();
  const Eigen::MatrixXcd ddc =
      exterior::matrix_of(n, k, k + 2, [&](const Form& b) { return alg.d(d_c(b, alg)); });
  return Form::from_vector(n, k, model.metric().adjoint(ddc, k, k + 2) * a.to_vector());
}

Form lee_form(const InvariantModel& model) {
  return model.metric().lambda(model.algebra().d(model.omega()));
}

Densities functional_densities(const InvariantModel& model) {
  const auto& alg = model.algebra();
  const auto& g = model.metric();
  const Form& omega = model.omega();
  const Form theta = lee_form(model);
  const double codiff = scalar_part(codifferential(theta, model));
  Densities out;
  out.g = codiff * codiff;
  out.f = g.norm_sq(alg.d(exterior::apply_J(theta)));
  out.a = g.norm_sq(alg.d(omega));
  out.r = g.norm_sq(alg.d(d_c(omega, alg)));
  out.v = g.norm_sq(alg.d(theta));
  return out;
}

Densities functional_values(const InvariantModel& model) {
  Densities d = functional_densities(model);
  const double vol = model.metric().total_volume();
  d.g *= vol;
  d.f *= vol;
  d.a *= vol;
  d.r *= vol;
  d.v *= vol;
  return d;
}

FOmega f_omega(const InvariantModel& model, double tol) {
  const auto& alg = model.algebra();
  const auto& g = model.metric();
  const Form theta = lee_form(model);
  FOmega out;
  out.from_contraction = -scalar_part(g.lambda(alg.d(exterior::apply_J(theta))));
  out.from_lee = g.norm_sq(theta) + scalar_part(codifferential(theta, model));
  const double scale = std::max(1.0, std::abs(out.from_lee));
  if (std::abs(out.from_contraction - out.from_lee) > tol * scale) {
    fail(ErrorCode::convention_mismatch,
         "f_Omega disagrees between Lambda(-dJ theta)=" + std::to_string(out.from_contraction) +
             " and |theta|^2 + d* theta=" + std::to_string(out.from_lee));
  }
  return out;
}

ElResiduals el_residuals(const InvariantModel& model) {
  const int n = model.n();
  const auto& alg = model.algebra();
  const auto& g = model.metric();
  const Form& omega = model.omega();
  const Form theta = lee_form(model);
  const Form q = codifferential(theta, model);
  const double qv = scalar_part(q);
  const Form dq = alg.d(q);

  ElResiduals out;
  out.g.constant = scalar_part(codifferential(dq, model)) + g.inner_product(dq, theta).real() -
                   n / (2.0 * (n - 1)) * qv * qv;

  const Form djt = alg.d(exterior::apply_J(theta));
  out.f.constant = (n - 2) * g.norm_sq(djt) + 2.0 * (n - 1) * scalar_part(ddc_adjoint(djt, model));

  out.a.constant = (n - 1) * g.norm_sq(alg.d(omega)) + 2.0 * qv;

  const Form ddc_omega = alg.d(d_c(omega, alg));
  out.r.constant = (n - 4) * g.norm_sq(ddc_omega) +
                   2.0 * scalar_part(g.lambda(ddc_adjoint(ddc_omega, model)));
  return out;
}

ClassificationReport classify(const InvariantModel& model, double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "classification tolerance must be positive");
  const int n = model.n();
  const auto& alg = model.algebra();
  const auto& g = model.metric();
  const Form& omega = model.omega();
  const Form theta = lee_form(model);
  const Form d_omega = alg.d(omega);
  const Form d_theta = alg.d(theta);
  const Form omega_n1 = exterior::power(omega, n - 1);
  const double d_theta_norm = g.norm(d_theta);

  auto flag = [tol](double residual) { return Flag{residual < tol, residual}; };

  ClassificationReport rep;
  rep.tolerance = tol;
  rep.kaehler = flag(g.norm(d_omega));
  rep.balanced = flag(g.norm(theta));
  rep.lck = flag(g.norm(d_omega - wedge(theta, omega) * (1.0 / (n - 1))) + d_theta_norm);
  rep.locally_conformally_balanced =
      flag(d_theta_norm + g.norm(alg.d(omega_n1) - wedge(theta, omega_n1)));
  rep.skt = flag(g.norm(alg.d(d_c(omega, alg))));
  rep.gauduchon = flag(std::abs(scalar_part(codifferential(theta, model))));

  const FOmega f = f_omega(model);
  rep.f_omega = f.value();
  rep.lee_norm_sq = g.norm_sq(theta);
  // f is constant on invariant models, so dd^c(f^{n-1} Omega^{n-1}) = f^{n-1} dd^c Omega^{n-1}.
  rep.distinguished =
      flag(std::pow(std::abs(f.value()), n - 1) * g.norm(alg.d(d_c(omega_n1, alg))));
  return rep;
}

CoframeAlgebra inoue_sm_algebra() {
  const int n = 2;
  using exterior::phi;
  using exterior::phi_bar;
  const Complex half_over_i = 1.0 / (2.0 * kI);
  Form d1 = wedge(phi(n, 1), phi(n, 2)) * half_over_i - wedge(phi(n, 1), phi_bar(n, 2)) * half_over_i;
  Form d2 = wedge(phi(n, 2), phi_bar(n, 2)) * (-kI);
  return CoframeAlgebra::from_unbarred(n, {d1, d2});
}

Eigen::MatrixXcd inoue_metric_matrix(double r, double s, Complex u) {
  // Omega = i r^2 p1^p1b + i s^2 p2^p2b + u p1^p2b - conj(u) p2^p1b
  Eigen::MatrixXcd h(2, 2);
  h << r * r, -kI * u, kI * std::conj(u), s * s;
  return h;
}

InvariantModel inoue_sm(double r, double s, Complex u, double c) {
  if (!(r * r > 0.0) || !(s * s > 0.0) || !(r * r * s * s - std::norm(u) > 0.0)) {
    fail(ErrorCode::non_positive_metric, "Inoue metric needs r^2 > 0, s^2 > 0, r^2 s^2 - |u|^2 > 0");
  }
  return InvariantModel(inoue_sm_algebra(), InvariantMetric(inoue_metric_matrix(r, s, u), c));
}

InvariantModel flat_torus(int n) {
  return InvariantModel(CoframeAlgebra::abelian(n), InvariantMetric::identity(n));
}

CoframeAlgebra iwasawa_algebra() {
  const int n = 3;
  return CoframeAlgebra::from_unbarred(
      n, {Form(n, 2), Form(n, 2), wedge(exterior::phi(n, 1), exterior::phi(n, 2))});
}

InvariantModel iwasawa() { return InvariantModel(iwasawa_algebra(), InvariantMetric::identity(3)); }

CoframeAlgebra kodaira_algebra() {
  const int n = 2;
  return CoframeAlgebra::from_unbarred(n, {Form(n, 2), wedge(exterior::phi(n, 1), exterior::phi_bar(n, 1))});
}

CoframeAlgebra product(const CoframeAlgebra& a, const CoframeAlgebra& b) {
  const int na = a.n();
  const int nb = b.n();
  const int n = na + nb;
  auto embed = [n](int target) { return Form::generator(n, target); };
  std::vector<Form> ia, ib;
  for (int j = 0; j < na; ++j) ia.push_back(embed(j));
  for (int j = 0; j < na; ++j) ia.push_back(embed(n + j));
  for (int j = 0; j < nb; ++j) ib.push_back(embed(na + j));
  for (int j = 0; j < nb; ++j) ib.push_back(embed(n + na + j));
  std::vector<Form> d_unbarred;
  for (int j = 0; j < na; ++j) d_unbarred.push_back(exterior::substitute(a.d_generator(j), ia));
  for (int j = 0; j < nb; ++j) d_unbarred.push_back(exterior::substitute(b.d_generator(j), ib));
  return CoframeAlgebra::from_unbarred(n, std::move(d_unbarred));
}

}  // namespace leelab::invariant
