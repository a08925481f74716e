#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "modlab/field.hpp"

namespace modlab {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Smooth target function with analytic first derivatives, parsed from a small grammar:
///
///   expr    := term (('+' | '-') term)*
///   term    := unary ('*' unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' digit)?          exponent 0..3
///   primary := number | x | y | '(' expr ')' | gauss '(' expr ')' | sin '(' expr ')' | cos '(' expr ')'
///
/// gauss(u) = e^{-u^2}. The builtin ids target1d and target2d name e^{-x^2} sin(3x) and
/// e^{-(x^2 + y^2)} sin(x + y).
class Target {
 public:
  struct Node;

  /// Builtin id or an expression; `dim` 0 infers 1 or 2 from the variables used.
  static Target parse(std::string_view source, std::size_t dim = 0);

  std::size_t dim() const { return dim_; }
  const std::string& source() const { return source_; }

  double value(std::span<const double> x) const;
  /// Returns the value and writes the gradient.
  double value_and_gradient(std::span<const double> x, std::span<double> gradient) const;

  SampledField sample(const std::vector<Axis>& axes) const;

 private:
  Target(std::shared_ptr<const Node> root, std::size_t dim, std::string source)
      : root_(std::move(root)), dim_(dim), source_(std::move(source)) {}

  std::shared_ptr<const Node> root_;
  std::size_t dim_;
  std::string source_;
};

}  // namespace modlab
