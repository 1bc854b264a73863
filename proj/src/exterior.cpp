#include "leelab/exterior.hpp"

#include "leelab/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

namespace leelab::exterior {

namespace {

void require_same_n(const Form& a, const Form& b) {
  if (a.n() != b.n()) {
    fail(ErrorCode::dimension_mismatch, "forms over different coframes: n=" +
                                            std::to_string(a.n()) + " vs n=" + std::to_string(b.n()));
  }
}

Mask conjugate_bit(int g, int n) { return Mask{1} << (g < n ? g + n : g - n); }

Complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

Basis::Basis(int n) : n_(n), masks_(2 * n + 1), index_(std::size_t{1} << (2 * n), -1) {
  const Mask count = Mask{1} << (2 * n);
  for (Mask m = 0; m < count; ++m) {
    auto& bucket = masks_[popcount(m)];
    index_[m] = static_cast<int>(bucket.size());
    bucket.push_back(m);
  }
}

const Basis& Basis::get(int n) {
  if (n < 1 || n > kMaxN) {
    fail(ErrorCode::invalid_argument, "coframe dimension n=" + std::to_string(n) +
                                          " outside [1, " + std::to_string(kMaxN) + "]");
  }
  static std::array<std::unique_ptr<Basis>, kMaxN + 1> tables;
  static std::once_flag flags[kMaxN + 1];
  std::call_once(flags[n], [n] { tables[n].reset(new Basis(n)); });
  return *tables[n];
}

int popcount(Mask m) { return std::popcount(m); }

int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int inversions = 0;
  for (Mask rest = b; rest; rest &= rest - 1) {
    const int g = std::countr_zero(rest);
    inversions += std::popcount(a >> (g + 1));
  }
  return (inversions & 1) ? -1 : 1;
}

std::pair<int, int> bidegree(Mask m, int n) {
  const Mask low = (Mask{1} << n) - 1;
  return {std::popcount(m & low), std::popcount(m & (low << n))};
}

Form::Form(int n, int degree) : n_(n), degree_(degree) {
  const Basis& b = Basis::get(n);
  if (degree < 0 || degree > b.generators()) {
    fail(ErrorCode::invalid_argument, "form degree " + std::to_string(degree) + " out of range");
  }
  coeffs_.assign(b.dimension(degree), Complex{});
}

Form Form::constant(int n, Complex value) {
  Form f(n, 0);
  f.coeffs_[0] = value;
  return f;
}

Form Form::generator(int n, int g) {
  Form f(n, 1);
  if (g < 0 || g >= 2 * n) fail(ErrorCode::invalid_argument, "generator index out of range");
  f.set(Mask{1} << g, 1.0);
  return f;
}

Form Form::from_vector(int n, int degree, const Eigen::VectorXcd& v) {
  Form f(n, degree);
  if (v.size() != static_cast<Eigen::Index>(f.coeffs_.size())) {
    fail(ErrorCode::dimension_mismatch, "coefficient vector has wrong length");
  }
  for (std::size_t i = 0; i < f.coeffs_.size(); ++i) f.coeffs_[i] = v(static_cast<Eigen::Index>(i));
  return f;
}

Complex Form::coefficient(Mask m) const {
  if (popcount(m) != degree_) return {};
  return coeffs_[basis().index(m)];
}

void Form::set(Mask m, Complex value) {
  if (popcount(m) != degree_) fail(ErrorCode::invalid_argument, "multi-index degree mismatch");
  coeffs_[basis().index(m)] = value;
}

void Form::add(Mask m, Complex value) {
  if (popcount(m) != degree_) fail(ErrorCode::invalid_argument, "multi-index degree mismatch");
  coeffs_[basis().index(m)] += value;
}

Eigen::VectorXcd Form::to_vector() const {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(coeffs_.size()));
  for (std::size_t i = 0; i < coeffs_.size(); ++i) v(static_cast<Eigen::Index>(i)) = coeffs_[i];
  return v;
}

Form Form::conjugate() const {
  Form out(n_, degree_);
  const auto masks = basis().masks(degree_);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (coeffs_[i] == Complex{}) continue;
    Mask image = 0;
    int sign = 1;
    for (Mask rest = masks[i]; rest; rest &= rest - 1) {
      const Mask bit = conjugate_bit(std::countr_zero(rest), n_);
      sign *= wedge_sign(image, bit);
      image |= bit;
    }
    out.add(image, static_cast<double>(sign) * std::conj(coeffs_[i]));
  }
  return out;
}

bool Form::is_real(double tol) const { return (*this - conjugate()).max_abs() <= tol; }

double Form::max_abs() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

Form& Form::operator+=(const Form& other) {
  require_same_n(*this, other);
  if (degree_ != other.degree_) fail(ErrorCode::dimension_mismatch, "adding forms of different degree");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

Form& Form::operator-=(const Form& other) {
  require_same_n(*this, other);
  if (degree_ != other.degree_) fail(ErrorCode::dimension_mismatch, "subtracting forms of different degree");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

Form& Form::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Form phi(int n, int j) { return Form::generator(n, j - 1); }
Form phi_bar(int n, int j) { return Form::generator(n, n + j - 1); }

Form wedge(const Form& a, const Form& b) {
  require_same_n(a, b);
  const int n = a.n();
  if (a.degree() + b.degree() > 2 * n) fail(ErrorCode::invalid_argument, "wedge exceeds top degree");
  Form out(n, a.degree() + b.degree());
  const Basis& basis = a.basis();
  const auto ma = basis.masks(a.degree());
  const auto mb = basis.masks(b.degree());
  const auto ca = a.coefficients();
  const auto cb = b.coefficients();
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (ca[i] == Complex{}) continue;
    for (std::size_t j = 0; j < mb.size(); ++j) {
      if (cb[j] == Complex{}) continue;
      const int s = wedge_sign(ma[i], mb[j]);
      if (s != 0) out.add(ma[i] | mb[j], static_cast<double>(s) * ca[i] * cb[j]);
    }
  }
  return out;
}

Form power(const Form& a, int k) {
  Form out = Form::constant(a.n(), 1.0);
  for (int i = 0; i < k; ++i) out = wedge(out, a);
  return out;
}

std::map<std::pair<int, int>, Form> pq_components(const Form& a) {
  std::map<std::pair<int, int>, Form> parts;
  const auto masks = a.basis().masks(a.degree());
  const auto c = a.coefficients();
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (c[i] == Complex{}) continue;
    const auto pq = bidegree(masks[i], a.n());
    auto it = parts.try_emplace(pq, a.n(), a.degree()).first;
    it->second.set(masks[i], c[i]);
  }
  return parts;
}

Form apply_J(const Form& a) {
  Form out(a.n(), a.degree());
  const auto masks = a.basis().masks(a.degree());
  const auto c = a.coefficients();
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto [p, q] = bidegree(masks[i], a.n());
    out.set(masks[i], i_power(q - p) * c[i]);
  }
  return out;
}

Form apply_J_inverse(const Form& a) {
  Form out = apply_J(a);
  if (a.degree() % 2) out *= -1.0;
  return out;
}

Form substitute(const Form& a, std::span<const Form> images) {
  if (static_cast<int>(images.size()) != 2 * a.n()) {
    fail(ErrorCode::dimension_mismatch, "substitution needs one image per generator");
  }
  const int target_n = images.front().n();
  Form out(target_n, a.degree());
  const auto masks = a.basis().masks(a.degree());
  const auto c = a.coefficients();
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (c[i] == Complex{}) continue;
    Form term = Form::constant(target_n, c[i]);
    for (Mask rest = masks[i]; rest; rest &= rest - 1) {
      term = wedge(term, images[std::countr_zero(rest)]);
    }
    out += term;
  }
  return out;
}

InvariantMetric::InvariantMetric(Eigen::MatrixXcd h, double volume_constant)
    : n_(static_cast<int>(h.rows())), h_(std::move(h)), c_(volume_constant) {
  if (h_.rows() != h_.cols()) fail(ErrorCode::dimension_mismatch, "metric matrix must be square");
  const Basis& basis = Basis::get(n_);
  if (!(c_ > 0.0) || !std::isfinite(c_)) {
    fail(ErrorCode::invalid_argument, "total volume constant must be positive");
  }
  const double scale = std::max(1.0, h_.cwiseAbs().maxCoeff());
  if ((h_ - h_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    fail(ErrorCode::non_positive_metric, "metric matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h_);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * scale) {
    fail(ErrorCode::non_positive_metric, "metric matrix is not positive definite");
  }

  // <phi^j, phi^k> = (h^-1)_{kj};  <conj phi^j, conj phi^k> = (h^-1)_{jk}.
  const Eigen::MatrixXcd hinv = h_.inverse();
  const int g = basis.generators();
  Eigen::MatrixXcd g1 = Eigen::MatrixXcd::Zero(g, g);
  for (int j = 0; j < n_; ++j) {
    for (int k = 0; k < n_; ++k) {
      g1(j, k) = hinv(k, j);
      g1(n_ + j, n_ + k) = hinv(j, k);
    }
  }

  gram_.resize(g + 1);
  gram_inverse_.resize(g + 1);
  for (int deg = 0; deg <= g; ++deg) {
    const auto masks = basis.masks(deg);
    const auto dim = static_cast<Eigen::Index>(masks.size());
    Eigen::MatrixXcd m(dim, dim);
    std::vector<int> ri, ci;
    for (Eigen::Index col = 0; col < dim; ++col) {
      for (Eigen::Index row = 0; row < dim; ++row) {
        // m(J, I) = <e_I, e_J> = det(<e_a, e_b>)_{a in I, b in J}
        Eigen::MatrixXcd sub(deg, deg);
        int r = 0;
        for (Mask ia = masks[col]; ia; ia &= ia - 1, ++r) {
          int s = 0;
          for (Mask jb = masks[row]; jb; jb &= jb - 1, ++s) {
            sub(r, s) = g1(std::countr_zero(ia), std::countr_zero(jb));
          }
        }
        m(row, col) = deg == 0 ? Complex{1.0} : sub.determinant();
      }
    }
    gram_[deg] = m;
    gram_inverse_[deg] = m.inverse();
  }

  const Form omega = fundamental_form();
  lambda_.resize(g + 1);
  for (int deg = 2; deg <= g; ++deg) {
    const Eigen::MatrixXcd lefschetz =
        matrix_of(n_, deg - 2, deg, [&](const Form& b) { return wedge(omega, b); });
    lambda_[deg] = adjoint(lefschetz, deg - 2, deg);
  }
}

InvariantMetric InvariantMetric::identity(int n, double volume_constant) {
  return InvariantMetric(Eigen::MatrixXcd::Identity(n, n), volume_constant);
}

double InvariantMetric::total_volume() const { return c_ * h_.determinant().real(); }

Complex InvariantMetric::inner_product(const Form& a, const Form& b) const {
  if (a.n() != n_ || b.n() != n_) fail(ErrorCode::dimension_mismatch, "form and metric dimensions differ");
  if (a.degree() != b.degree()) fail(ErrorCode::dimension_mismatch, "inner product of forms of different degree");
  const Eigen::VectorXcd va = a.to_vector();
  const Eigen::VectorXcd vb = b.to_vector();
  return vb.dot(gram_[a.degree()] * va);
}

double InvariantMetric::norm_sq(const Form& a) const { return inner_product(a, a).real(); }

double InvariantMetric::norm(const Form& a) const { return std::sqrt(std::max(0.0, norm_sq(a))); }

Form InvariantMetric::fundamental_form() const {
  Form omega(n_, 2);
  for (int j = 0; j < n_; ++j) {
    for (int k = 0; k < n_; ++k) {
      omega += wedge(phi(n_, j + 1), phi_bar(n_, k + 1)) * (kI * h_(j, k));
    }
  }
  return omega;
}

Form InvariantMetric::volume_form() const {
  double factorial = 1.0;
  for (int k = 2; k <= n_; ++k) factorial *= k;
  return power(fundamental_form(), n_) * (1.0 / factorial);
}

Form InvariantMetric::hodge_star(const Form& a) const {
  if (a.n() != n_) fail(ErrorCode::dimension_mismatch, "form and metric dimensions differ");
  const Basis& basis = Basis::get(n_);
  const Mask top = basis.top();
  const Complex vol = volume_form().coefficient(top);
  const int k = a.degree();
  Form out(n_, basis.generators() - k);
  // e_I ^ *a = <e_I, conj(a)> vol for every basis element e_I.
  const Eigen::VectorXcd abar = a.conjugate().to_vector();
  const Eigen::VectorXcd pairing = gram_[k].transpose() * abar.conjugate();
  const auto masks = basis.masks(k);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const Mask rest = top & ~masks[i];
    out.set(rest, static_cast<double>(wedge_sign(masks[i], rest)) * vol *
                      pairing(static_cast<Eigen::Index>(i)));
  }
  return out;
}

Form InvariantMetric::lambda(const Form& a) const {
  if (a.n() != n_) fail(ErrorCode::dimension_mismatch, "form and metric dimensions differ");
  if (a.degree() < 2) return Form(n_, 0);
  return Form::from_vector(n_, a.degree() - 2, lambda_[a.degree()] * a.to_vector());
}

Eigen::MatrixXcd InvariantMetric::adjoint(const Eigen::MatrixXcd& map, int from, int to) const {
  return gram_inverse_[from] * map.adjoint() * gram_[to];
}

}  // namespace leelab::exterior
