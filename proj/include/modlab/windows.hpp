#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace modlab {

/// Normalization of a Gaussian window.
///  - Canonical: e^{-pi |x|^2}, the analytic window used with the closed-form ReLU STFT.
///  - Unit:      e^{-|x|^2 / 2}, the variance-1 window used by the trainable networks.
enum class GaussianNorm { Canonical, Unit };

/// Exponent rate a in e^{-a |x|^2}.
constexpr double gaussian_rate(GaussianNorm norm) {
  return norm == GaussianNorm::Canonical ? 3.14159265358979323846 : 0.5;
}

double gaussian(double t, GaussianNorm norm);
double gaussian(std::span<const double> x, GaussianNorm norm);

/// First and second derivative of the 1-D Gaussian.
double gaussian_d1(double t, GaussianNorm norm);
double gaussian_d2(double t, GaussianNorm norm);

/// L2 inner product (g1, g2) of two Gaussians in dimension d.
double gaussian_inner(GaussianNorm a, GaussianNorm b, std::size_t dim);

/// Polynomial weight v_s(z) = (1 + |z|^2)^{s/2}.
class PolyWeight {
 public:
  explicit PolyWeight(double s) : s_(s) {}

  double exponent() const { return s_; }
  double operator()(std::span<const double> z) const;
  double operator()(double z) const;
  /// Evaluates from the squared norm |z|^2.
  double from_norm2(double r2) const;
  double log_from_norm2(double r2) const;

 private:
  double s_;
};

/// Scalar activation composed from ReLUs.
class Activation {
 public:
  enum class Kind { Relu, Ramp, Tooth };

  static Activation relu();
  /// (x - b1)_+ - (x - b2)_+ ; requires b1 < b2.
  static Activation ramp(double b1, double b2);
  /// (x - b1)_+ - 2 (x - b2)_+ + (x - b3)_+ ; requires b1 < b2 < b3 equally spaced.
  static Activation tooth(double b1, double b2, double b3);

  Kind kind() const { return kind_; }
  std::span<const double> breakpoints() const {
    return {breaks_.data(), kind_ == Kind::Relu ? 1u : kind_ == Kind::Ramp ? 2u : 3u};
  }

  double value(double x) const;
  /// a.e. derivative; at breakpoints the right derivative is returned.
  double derivative(double x) const;
  /// Second derivative in the a.e. sense (always 0 for these piecewise-linear shapes).
  double second_derivative(double) const { return 0.0; }

 private:
  Activation(Kind kind, std::array<double, 3> breaks) : kind_(kind), breaks_(breaks) {}
  Kind kind_;
  std::array<double, 3> breaks_;
};

}  // namespace modlab
