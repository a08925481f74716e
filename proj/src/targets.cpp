#include "modlab/targets.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include <fmt/format.h>

namespace modlab {

namespace {

/// Value with gradient in up to two variables.
struct Jet {
  double v = 0.0;
  std::array<double, 2> g{0.0, 0.0};
};

Jet operator+(Jet a, const Jet& b) {
  a.v += b.v;
  a.g[0] += b.g[0];
  a.g[1] += b.g[1];
  return a;
}
Jet operator-(Jet a, const Jet& b) {
  a.v -= b.v;
  a.g[0] -= b.g[0];
  a.g[1] -= b.g[1];
  return a;
}
Jet operator*(const Jet& a, const Jet& b) {
  return Jet{a.v * b.v, {a.g[0] * b.v + a.v * b.g[0], a.g[1] * b.v + a.v * b.g[1]}};
}
/// f(a) given f(a.v) and f'(a.v).
Jet chain(const Jet& a, double f, double df) { return Jet{f, {df * a.g[0], df * a.g[1]}}; }

}  // namespace

struct Target::Node {
  enum class Op { Const, Var, Add, Sub, Mul, Neg, Pow, Gauss, Sin, Cos };
  Op op = Op::Const;
  double number = 0.0;
  int index = 0;  // variable index or exponent
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  Jet eval(std::span<const double> x) const {
    switch (op) {
      case Op::Const:
        return Jet{number, {0.0, 0.0}};
      case Op::Var: {
        Jet j{x[index], {0.0, 0.0}};
        j.g[index] = 1.0;
        return j;
      }
      case Op::Add:
        return lhs->eval(x) + rhs->eval(x);
      case Op::Sub:
        return lhs->eval(x) - rhs->eval(x);
      case Op::Mul:
        return lhs->eval(x) * rhs->eval(x);
      case Op::Neg: {
        Jet a = lhs->eval(x);
        return Jet{-a.v, {-a.g[0], -a.g[1]}};
      }
      case Op::Pow: {
        const Jet a = lhs->eval(x);
        if (index == 0) return Jet{1.0, {0.0, 0.0}};
        return chain(a, std::pow(a.v, index), index * std::pow(a.v, index - 1));
      }
      case Op::Gauss: {
        const Jet a = lhs->eval(x);
        const double e = std::exp(-a.v * a.v);
        return chain(a, e, -2.0 * a.v * e);
      }
      case Op::Sin: {
        const Jet a = lhs->eval(x);
        return chain(a, std::sin(a.v), std::cos(a.v));
      }
      case Op::Cos: {
        const Jet a = lhs->eval(x);
        return chain(a, std::cos(a.v), -std::sin(a.v));
      }
    }
    return {};
  }
};

namespace {

using NodePtr = std::shared_ptr<const Target::Node>;
using Op = Target::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Target::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }
  std::size_t max_var() const { return max_var_; }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError(fmt::format("{} at offset {} in '{}'", what, pos_, src_));
  }
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(fmt::format("expected '{}'", c));
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }
  NodePtr term() {
    NodePtr lhs = unary();
    while (accept('*')) lhs = make(Op::Mul, lhs, unary());
    return lhs;
  }
  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) {
      skip();
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) fail("expected exponent digit");
      const int e = src_[pos_++] - '0';
      if (e > 3) fail("exponents above 3 are outside the grammar");
      auto n = std::make_shared<Target::Node>();
      n->op = Op::Pow;
      n->index = e;
      n->lhs = base;
      return n;
    }
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.data() + pos_;
      char* end = nullptr;
      const std::string buf(begin, src_.size() - pos_);
      const double v = std::strtod(buf.c_str(), &end);
      pos_ += static_cast<std::size_t>(end - buf.c_str());
      auto n = std::make_shared<Target::Node>();
      n->number = v;
      return n;
    }
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view word = src_.substr(start, pos_ - start);
    if (word == "x" || word == "y") {
      auto n = std::make_shared<Target::Node>();
      n->op = Op::Var;
      n->index = word == "x" ? 0 : 1;
      max_var_ = std::max<std::size_t>(max_var_, n->index + 1);
      return n;
    }
    Op op;
    if (word == "gauss") {
      op = Op::Gauss;
    } else if (word == "sin") {
      op = Op::Sin;
    } else if (word == "cos") {
      op = Op::Cos;
    } else {
      pos_ = start;
      fail(fmt::format("unknown symbol '{}'", word));
    }
    expect('(');
    NodePtr arg = expr();
    expect(')');
    return make(op, arg);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t max_var_ = 1;
};

}  // namespace

Target Target::parse(std::string_view source, std::size_t dim) {
  std::string text(source);
  std::string expanded = text;
  if (text == "target1d") {
    expanded = "gauss(x)*sin(3*x)";
    if (dim == 0) dim = 1;
  } else if (text == "target2d") {
    expanded = "gauss(x)*gauss(y)*sin(x+y)";
    if (dim == 0) dim = 2;
  }
  Parser parser(expanded);
  NodePtr root = parser.parse();
  if (dim == 0) dim = parser.max_var();
  if (dim != 1 && dim != 2) throw ExpressionError("target dimension must be 1 or 2");
  if (parser.max_var() > dim) throw ExpressionError(fmt::format("'{}' uses y but the target is 1-D", text));
  return Target(std::move(root), dim, text);
}

double Target::value(std::span<const double> x) const { return root_->eval(x).v; }

double Target::value_and_gradient(std::span<const double> x, std::span<double> gradient) const {
  const Jet j = root_->eval(x);
  for (std::size_t k = 0; k < dim_; ++k) gradient[k] = j.g[k];
  return j.v;
}

SampledField Target::sample(const std::vector<Axis>& axes) const {
  if (axes.size() != dim_) throw std::invalid_argument("sampling axes do not match target dimension");
  return SampledField::sample(axes, [&](std::span<const double> x) { return value(x); });
}

}  // namespace modlab
