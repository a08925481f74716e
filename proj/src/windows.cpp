#include "modlab/windows.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace modlab {

namespace {
constexpr double kLogSpaceThreshold = 64.0;

double positive_part(double x) { return x > 0.0 ? x : 0.0; }
double step_right(double x) { return x >= 0.0 ? 1.0 : 0.0; }
}  // namespace

double gaussian(double t, GaussianNorm norm) {
  return std::exp(-gaussian_rate(norm) * t * t);
}

double gaussian(std::span<const double> x, GaussianNorm norm) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return std::exp(-gaussian_rate(norm) * r2);
}

double gaussian_d1(double t, GaussianNorm norm) {
  const double a = gaussian_rate(norm);
  return -2.0 * a * t * std::exp(-a * t * t);
}

double gaussian_d2(double t, GaussianNorm norm) {
  const double a = gaussian_rate(norm);
  return (4.0 * a * a * t * t - 2.0 * a) * std::exp(-a * t * t);
}

double gaussian_inner(GaussianNorm a, GaussianNorm b, std::size_t dim) {
  const double rate = gaussian_rate(a) + gaussian_rate(b);
  return std::pow(std::numbers::pi / rate, 0.5 * static_cast<double>(dim));
}

double PolyWeight::operator()(std::span<const double> z) const {
  double r2 = 0.0;
  for (double v : z) r2 += v * v;
  return from_norm2(r2);
}

double PolyWeight::operator()(double z) const { return from_norm2(z * z); }

double PolyWeight::from_norm2(double r2) const {
  if (s_ == 0.0) return 1.0;
  // Large |s| overflows pow long before the log does.
  if (std::abs(s_) > kLogSpaceThreshold) return std::exp(log_from_norm2(r2));
  return std::pow(1.0 + r2, 0.5 * s_);
}

double PolyWeight::log_from_norm2(double r2) const { return 0.5 * s_ * std::log1p(r2); }

Activation Activation::relu() { return Activation(Kind::Relu, {0.0, 0.0, 0.0}); }

Activation Activation::ramp(double b1, double b2) {
  if (!(b1 < b2)) throw std::invalid_argument("ramp breakpoints must satisfy b1 < b2");
  return Activation(Kind::Ramp, {b1, b2, 0.0});
}

Activation Activation::tooth(double b1, double b2, double b3) {
  if (!(b1 < b2 && b2 < b3)) {
    throw std::invalid_argument("tooth breakpoints must satisfy b1 < b2 < b3");
  }
  const double left = b2 - b1;
  const double right = b3 - b2;
  if (std::abs(left - right) > 1e-12 * std::max(std::abs(left), std::abs(right))) {
    throw std::invalid_argument("tooth breakpoints must be equally spaced");
  }
  return Activation(Kind::Tooth, {b1, b2, b3});
}

double Activation::value(double x) const {
  switch (kind_) {
    case Kind::Relu:
      return positive_part(x);
    case Kind::Ramp:
      return positive_part(x - breaks_[0]) - positive_part(x - breaks_[1]);
    case Kind::Tooth:
      return positive_part(x - breaks_[0]) - 2.0 * positive_part(x - breaks_[1]) + positive_part(x - breaks_[2]);
  }
  return 0.0;
}

double Activation::derivative(double x) const {
  switch (kind_) {
    case Kind::Relu:
      return step_right(x);
    case Kind::Ramp:
      return step_right(x - breaks_[0]) - step_right(x - breaks_[1]);
    case Kind::Tooth:
      return step_right(x - breaks_[0]) - 2.0 * step_right(x - breaks_[1]) +
             step_right(x - breaks_[2]);
  }
  return 0.0;
}

}  // namespace modlab
