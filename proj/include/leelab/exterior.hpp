#pragma once

// Complex exterior algebra with constant coefficients over the coframe
// {phi^1..phi^n, conj(phi^1)..conj(phi^n)}. Generator g occupies bit g of a
// Mask; the global order phi^1 < .. < phi^n < conj(phi^1) < .. fixes all signs.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace leelab::exterior {

using Complex = std::complex<double>;
using Mask = std::uint32_t;

inline constexpr int kMaxN = 5;
inline constexpr Complex kI{0.0, 1.0};

/// Enumeration of the multi-indices of each degree for a fixed n.
class Basis {
 public:
  static const Basis& get(int n);

  int n() const { return n_; }
  int generators() const { return 2 * n_; }
  int dimension(int degree) const { return static_cast<int>(masks_[degree].size()); }
  std::span<const Mask> masks(int degree) const { return masks_[degree]; }
  int index(Mask m) const { return index_[m]; }
  Mask top() const { return (Mask{1} << (2 * n_)) - 1; }
  Mask unbarred() const { return (Mask{1} << n_) - 1; }
  Mask barred() const { return unbarred() << n_; }

 private:
  explicit Basis(int n);
  int n_;
  std::vector<std::vector<Mask>> masks_;
  std::vector<int> index_;
};

int popcount(Mask m);

/// Sign of e_a ^ e_b relative to e_{a|b}; zero when the masks overlap.
int wedge_sign(Mask a, Mask b);

/// Bidegree (p, q): p unbarred, q barred generators.
std::pair<int, int> bidegree(Mask m, int n);

class Form {
 public:
  Form() = default;
  Form(int n, int degree);

  static Form constant(int n, Complex value);
  /// 0-based generator index g in [0, 2n).
  static Form generator(int n, int g);
  static Form from_vector(int n, int degree, const Eigen::VectorXcd& v);

  int n() const { return n_; }
  int degree() const { return degree_; }
  const Basis& basis() const { return Basis::get(n_); }

  Complex coefficient(Mask m) const;
  void set(Mask m, Complex value);
  void add(Mask m, Complex value);
  std::span<const Complex> coefficients() const { return coeffs_; }
  Eigen::VectorXcd to_vector() const;

  Form conjugate() const;
  bool is_real(double tol = 1e-12) const;
  double max_abs() const;

  Form& operator+=(const Form& other);
  Form& operator-=(const Form& other);
  Form& operator*=(Complex s);

  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator-(Form a) { return a *= -1.0; }
  friend Form operator*(Form a, Complex s) { return a *= s; }
  friend Form operator*(Complex s, Form a) { return a *= s; }

 private:
  int n_ = 0;
  int degree_ = 0;
  std::vector<Complex> coeffs_;
};

/// phi^j and conj(phi^j) with 1-based j, matching the usual notation.
Form phi(int n, int j);
Form phi_bar(int n, int j);

Form wedge(const Form& a, const Form& b);
Form power(const Form& a, int k);

std::map<std::pair<int, int>, Form> pq_components(const Form& a);

/// J acts on (p,q)-forms by sqrt(-1)^(q-p).
Form apply_J(const Form& a);
Form apply_J_inverse(const Form& a);

/// Linear substitution of generators: generator g of `a` is replaced by the
/// 1-form images[g] (all images share one target n).
Form substitute(const Form& a, std::span<const Form> images);

/// Matrix of a linear map between fixed degrees, columns = images of
/// basis elements.
template <class Map>
Eigen::MatrixXcd matrix_of(int n, int degree_from, int degree_to, Map&& map) {
  const Basis& b = Basis::get(n);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(b.dimension(degree_to), b.dimension(degree_from));
  for (int col = 0; col < b.dimension(degree_from); ++col) {
    Form e(n, degree_from);
    e.set(b.masks(degree_from)[col], 1.0);
    m.col(col) = map(e).to_vector();
  }
  return m;
}

/// Hermitian metric with fundamental form sqrt(-1) sum h_{jk} phi^j ^ conj(phi^k)
/// and total volume c * det(h), where c is the integral of
/// sqrt(-1)^n phi^1 ^ conj(phi^1) ^ ... ^ phi^n ^ conj(phi^n).
class InvariantMetric {
 public:
  InvariantMetric(Eigen::MatrixXcd h, double volume_constant = 1.0);

  static InvariantMetric identity(int n, double volume_constant = 1.0);

  int n() const { return n_; }
  const Eigen::MatrixXcd& h() const { return h_; }
  double volume_constant() const { return c_; }
  double total_volume() const;

  /// Gram matrix G with <a, b> = b^H G a on degree-k coefficient vectors.
  const Eigen::MatrixXcd& gram(int degree) const { return gram_[degree]; }

  Complex inner_product(const Form& a, const Form& b) const;
  double norm_sq(const Form& a) const;
  double norm(const Form& a) const;

  Form fundamental_form() const;
  Form volume_form() const;
  Form hodge_star(const Form& a) const;
  Form lambda(const Form& a) const;

  /// Adjoint with respect to the Gram inner products of a map given as a
  /// matrix from degree `from` to degree `to`; the result maps `to` -> `from`.
  Eigen::MatrixXcd adjoint(const Eigen::MatrixXcd& map, int from, int to) const;

 private:
  int n_;
  Eigen::MatrixXcd h_;
  double c_;
  std::vector<Eigen::MatrixXcd> gram_;
  std::vector<Eigen::MatrixXcd> gram_inverse_;
  std::vector<Eigen::MatrixXcd> lambda_;  // degree k -> k-2
};

}  // namespace leelab::exterior
