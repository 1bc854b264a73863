#pragma once

// Field expressions for grid inputs.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'pi' | xK | yK | dxK | dyK | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt
//
// K is 1..n. Coordinates are x_1..x_n, y_1..y_n on (R/2piZ)^{2n}; dxK and dyK
// are the real coframe. A scalar expression may not contain differentials; a
// drift is a sum of terms linear in exactly one differential (or "0").

#include "leelab/torus.hpp"

#include <memory>
#include <string>

namespace leelab::fieldspec {

class Expression {
 public:
  /// Throws invalid_argument with the offending position on syntax errors.
  static Expression parse(const std::string& text, int n);

  /// 0 for scalars, 1 for expressions linear in the differentials.
  int degree() const;
  const std::string& text() const { return text_; }

  torus::ScalarField scalar(const torus::TorusGrid& grid) const;
  torus::FieldForm one_form(const torus::TorusGrid& grid) const;

  struct Node;

 private:
  std::string text_;
  int n_ = 0;
  std::shared_ptr<const Node> root_;
};

/// A scalar expression, or a path to a CSV field file when `spec` names an
/// existing file or ends in ".csv".
torus::ScalarField load_scalar(const std::string& spec, const torus::TorusGrid& grid);

/// A drift expression; "0" gives the zero 1-form.
torus::FieldForm load_one_form(const std::string& spec, const torus::TorusGrid& grid);

}  // namespace leelab::fieldspec
