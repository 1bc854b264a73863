#include "leelab/fieldspec.hpp"

#include "leelab/error.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

namespace leelab::fieldspec {

using exterior::Mask;
using torus::FieldForm;
using torus::ScalarField;
using torus::TorusGrid;

struct Expression::Node {
  enum class Kind { number, coordinate, differential, neg, add, sub, mul, div, pow, func };
  Kind kind = Kind::number;
  double value = 0.0;
  int index = 0;  // coordinate / differential slot 0..2n-1
  std::string func;
  std::shared_ptr<const Node> a, b;
  int degree = 0;
};

namespace {

using Node = Expression::Node;
using Kind = Node::Kind;
using NodePtr = std::shared_ptr<const Node>;

// A value linear in the differentials: s + sum_i w[i] e_i, never both.
struct Value {
  double s = 0.0;
  std::vector<double> w;
};

class Parser {
 public:
  Parser(const std::string& text, int n) : text_(text), n_(n) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != text_.size()) error("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::invalid_argument,
         "field spec \"" + text_ + "\": " + what + " at position " + std::to_string(pos_ + 1));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Kind k, NodePtr a, NodePtr b, int degree) {
    auto node = std::make_shared<Node>();
    node->kind = k;
    node->a = std::move(a);
    node->b = std::move(b);
    node->degree = degree;
    return node;
  }

  NodePtr expr() {
    NodePtr left = term();
    for (;;) {
      const std::size_t at = pos_;
      Kind k;
      if (accept('+')) {
        k = Kind::add;
      } else if (accept('-')) {
        k = Kind::sub;
      } else {
        return left;
      }
      NodePtr right = term();
      if (left->degree != right->degree) {
        pos_ = at;
        error("cannot add a function and a differential form");
      }
      left = make(k, left, right, left->degree);
    }
  }

  NodePtr term() {
    NodePtr left = unary();
    for (;;) {
      const std::size_t at = pos_;
      if (accept('*')) {
        NodePtr right = unary();
        if (left->degree + right->degree > 1) {
          pos_ = at;
          error("product of two differentials");
        }
        left = make(Kind::mul, left, right, left->degree + right->degree);
      } else if (accept('/')) {
        NodePtr right = unary();
        if (right->degree != 0) {
          pos_ = at;
          error("division by a differential");
        }
        left = make(Kind::div, left, right, left->degree);
      } else {
        return left;
      }
    }
  }

  NodePtr unary() {
    if (accept('+')) return unary();
    if (accept('-')) {
      NodePtr a = unary();
      return make(Kind::neg, a, nullptr, a->degree);
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    const std::size_t at = pos_;
    if (accept('^')) {
      NodePtr exponent = unary();
      if (base->degree != 0 || exponent->degree != 0) {
        pos_ = at;
        error("powers of differentials");
      }
      return make(Kind::pow, base, exponent, 0);
    }
    return base;
  }

  int slot(char axis, std::size_t start) {
    std::size_t end = pos_;
    while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
    if (end == pos_) error("missing coordinate index");
    const int k = std::stoi(text_.substr(pos_, end - pos_));
    if (k < 1 || k > n_) {
      pos_ = start;
      error("coordinate index out of range 1.." + std::to_string(n_));
    }
    pos_ = end;
    return (axis == 'x' ? 0 : n_) + k - 1;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) error("unexpected end of input");
    const std::size_t start = pos_;
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text_.substr(pos_), &used);
      } catch (const std::exception&) {
        error("malformed number");
      }
      pos_ += used;
      auto node = std::make_shared<Node>();
      node->value = v;
      return node;
    }
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) error("expected ')'");
      return e;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) error("unexpected character");
    std::size_t end = pos_;
    while (end < text_.size() && std::isalpha(static_cast<unsigned char>(text_[end]))) ++end;
    const std::string word = text_.substr(pos_, end - pos_);
    pos_ = end;
    auto node = std::make_shared<Node>();
    if (word == "pi") {
      node->value = std::numbers::pi;
      return node;
    }
    if (word == "x" || word == "y") {
      node->kind = Kind::coordinate;
      node->index = slot(word[0], start);
      return node;
    }
    if (word == "dx" || word == "dy") {
      node->kind = Kind::differential;
      node->index = slot(word[1], start);
      node->degree = 1;
      return node;
    }
    if (word == "sin" || word == "cos" || word == "exp" || word == "log" || word == "sqrt") {
      if (!accept('(')) error("expected '(' after " + word);
      NodePtr arg = expr();
      if (!accept(')')) error("expected ')'");
      if (arg->degree != 0) {
        pos_ = start;
        error(word + " of a differential");
      }
      node->kind = Kind::func;
      node->func = word;
      node->a = arg;
      return node;
    }
    pos_ = start;
    error("unknown name \"" + word + "\"");
  }

  const std::string& text_;
  int n_;
  std::size_t pos_ = 0;
};

double eval_scalar(const Node& node, std::span<const double> x) {
  switch (node.kind) {
    case Kind::number: return node.value;
    case Kind::coordinate: return x[node.index];
    case Kind::neg: return -eval_scalar(*node.a, x);
    case Kind::add: return eval_scalar(*node.a, x) + eval_scalar(*node.b, x);
    case Kind::sub: return eval_scalar(*node.a, x) - eval_scalar(*node.b, x);
    case Kind::mul: return eval_scalar(*node.a, x) * eval_scalar(*node.b, x);
    case Kind::div: return eval_scalar(*node.a, x) / eval_scalar(*node.b, x);
    case Kind::pow: return std::pow(eval_scalar(*node.a, x), eval_scalar(*node.b, x));
    case Kind::func: {
      const double v = eval_scalar(*node.a, x);
      if (node.func == "sin") return std::sin(v);
      if (node.func == "cos") return std::cos(v);
      if (node.func == "exp") return std::exp(v);
      if (node.func == "log") return std::log(v);
      return std::sqrt(v);
    }
    case Kind::differential: break;
  }
  fail(ErrorCode::invalid_argument, "differential in a scalar context");
}

// Coefficients of a degree-1 node; w has one entry per differential.
void eval_form(const Node& node, std::span<const double> x, double scale, std::vector<double>& w) {
  switch (node.kind) {
    case Kind::differential: w[node.index] += scale; return;
    case Kind::neg: eval_form(*node.a, x, -scale, w); return;
    case Kind::add:
      eval_form(*node.a, x, scale, w);
      eval_form(*node.b, x, scale, w);
      return;
    case Kind::sub:
      eval_form(*node.a, x, scale, w);
      eval_form(*node.b, x, -scale, w);
      return;
    case Kind::mul:
      if (node.a->degree == 1) {
        eval_form(*node.a, x, scale * eval_scalar(*node.b, x), w);
      } else {
        eval_form(*node.b, x, scale * eval_scalar(*node.a, x), w);
      }
      return;
    case Kind::div: eval_form(*node.a, x, scale / eval_scalar(*node.b, x), w); return;
    default: break;
  }
  fail(ErrorCode::invalid_argument, "expression is not linear in the differentials");
}

void require_finite(const ScalarField& f, const std::string& text) {
  for (double v : f.values()) {
    if (!std::isfinite(v)) fail(ErrorCode::invalid_argument, "field spec \"" + text + "\" is not finite on the grid");
  }
}

}  // namespace

Expression Expression::parse(const std::string& text, int n) {
  if (n < 1 || n > exterior::kMaxN) fail(ErrorCode::invalid_argument, "complex dimension out of range");
  Expression e;
  e.text_ = text;
  e.n_ = n;
  e.root_ = Parser(e.text_, n).parse();
  return e;
}

int Expression::degree() const { return root_->degree; }

ScalarField Expression::scalar(const TorusGrid& grid) const {
  if (grid.n() != n_) fail(ErrorCode::dimension_mismatch, "field spec parsed for another dimension");
  if (degree() != 0) fail(ErrorCode::invalid_argument, "field spec \"" + text_ + "\" contains differentials");
  ScalarField f = ScalarField::sample(grid, [this](std::span<const double> x) { return eval_scalar(*root_, x); });
  require_finite(f, text_);
  return f;
}

FieldForm Expression::one_form(const TorusGrid& grid) const {
  if (grid.n() != n_) fail(ErrorCode::dimension_mismatch, "field spec parsed for another dimension");
  FieldForm out(grid, 1);
  if (degree() == 0) {
    if (scalar(grid).max_abs() != 0.0) {
      fail(ErrorCode::invalid_argument, "drift \"" + text_ + "\" is a function, not a 1-form");
    }
    return out;
  }
  const int axes = grid.axes();
  std::vector<std::vector<double>> coeffs(axes, std::vector<double>(grid.size()));
  std::vector<double> w(axes);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const std::vector<double> x = grid.coordinates(p);
    std::fill(w.begin(), w.end(), 0.0);
    eval_form(*root_, x, 1.0, w);
    for (int a = 0; a < axes; ++a) coeffs[a][p] = w[a];
  }
  for (int a = 0; a < axes; ++a) {
    out.coefficient(Mask{1} << a) = ScalarField(grid, std::move(coeffs[a]));
    require_finite(out.coefficient(Mask{1} << a), text_);
  }
  return out;
}

ScalarField load_scalar(const std::string& spec, const TorusGrid& grid) {
  std::error_code ec;
  const bool is_file = std::filesystem::is_regular_file(spec, ec);
  if (is_file || (spec.size() > 4 && spec.compare(spec.size() - 4, 4, ".csv") == 0)) {
    std::ifstream in(spec);
    if (!in) fail(ErrorCode::malformed_file, "cannot open field file " + spec);
    return torus::read_csv(in, grid);
  }
  return Expression::parse(spec, grid.n()).scalar(grid);
}

FieldForm load_one_form(const std::string& spec, const TorusGrid& grid) {
  return Expression::parse(spec, grid.n()).one_form(grid);
}

}  // namespace leelab::fieldspec
