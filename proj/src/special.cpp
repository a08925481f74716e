#include "modlab/special.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace modlab {

namespace {

using cplx = std::complex<double>;

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

// w(x + iy) for x >= 0, y >= 0. Three regimes on the scaled radius
// rho^2 = (x/6.3)^2 + (y/4.4)^2: Maclaurin series of erfc(-iz) near the origin,
// the Laplace continued fraction far out, and in between a Taylor expansion about
// z + ih whose derivatives come from the same continued fraction.
cplx faddeeva_first_quadrant(double x, double y) {
  const double xs = x / 6.3;
  const double ys = y / 4.4;
  double qrho = xs * xs + ys * ys;

  if (qrho < 0.085264) {
    const double root = (1.0 - 0.85 * ys) * std::sqrt(qrho);
    const int n = static_cast<int>(std::lround(6.0 + 72.0 * root));
    int j = 2 * n + 1;
    double xsum = 1.0 / j;
    double ysum = 0.0;
    const double xquad = x * x - y * y;
    const double yquad = 2.0 * x * y;
    for (int i = n; i >= 1; --i) {
      j -= 2;
      const double xaux = (xsum * xquad - ysum * yquad) / i;
      ysum = (xsum * yquad + ysum * xquad) / i;
      xsum = xaux + 1.0 / j;
    }
    // 1 + erf(iz) = erfc(-iz)
    const cplx head(1.0 - kTwoOverSqrtPi * (xsum * y + ysum * x),
                    kTwoOverSqrtPi * (xsum * x - ysum * y));
    const double mag = std::exp(-xquad);
    const cplx gauss(mag * std::cos(yquad), -mag * std::sin(yquad));
    return head * gauss;
  }

  double h = 0.0;
  int kapn = 0;
  int nu = 0;
  if (qrho > 1.0) {
    const double root = std::sqrt(qrho);
    nu = static_cast<int>(3.0 + 1442.0 / (26.0 * root + 77.0));
  } else {
    const double root = (1.0 - ys) * std::sqrt(1.0 - qrho);
    h = 1.88 * root;
    kapn = static_cast<int>(std::lround(7.0 + 34.0 * root));
    nu = static_cast<int>(std::lround(16.0 + 26.0 * root));
  }
  const bool taylor = h > 0.0;
  const double h2 = 2.0 * h;
  double qlambda = taylor ? std::pow(h2, kapn) : 0.0;
  double rx = 0.0, ry = 0.0, sx = 0.0, sy = 0.0;
  for (int n = nu; n >= 0; --n) {
    const double np1 = n + 1.0;
    double tx = y + h + np1 * rx;
    const double ty = x - np1 * ry;
    const double c = 0.5 / (tx * tx + ty * ty);
    rx = c * tx;
    ry = c * ty;
    if (taylor && n <= kapn) {
      tx = qlambda + sx;
      sx = rx * tx - ry * sy;
      sy = ry * tx + rx * sy;
      qlambda /= h2;
    }
  }
  cplx w = taylor ? cplx(kTwoOverSqrtPi * sx, kTwoOverSqrtPi * sy)
                  : cplx(kTwoOverSqrtPi * rx, kTwoOverSqrtPi * ry);
  if (y == 0.0) w.real(std::exp(-x * x));
  return w;
}

}  // namespace

cplx faddeeva(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  if (y >= 0.0) {
    // w(-conj z) = conj(w(z))
    return x >= 0.0 ? faddeeva_first_quadrant(x, y) : std::conj(faddeeva_first_quadrant(-x, y));
  }
  // w(z) = 2 e^{-z^2} - w(-z)
  return 2.0 * std::exp(-z * z) - faddeeva(-z);
}

cplx erfc_complex(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > kErfcMaxModulus) {
    throw ErfcDomainError(fmt::format("erfc argument ({}, {}) outside |z| <= {}", z.real(),
                                      z.imag(), kErfcMaxModulus));
  }
  // Map to the half plane where w is evaluated without reflection:
  // Re z >= 0: erfc(z) = e^{-z^2} w(iz);  Re z < 0: erfc(z) = 2 - e^{-z^2} w(-iz).
  const cplx iz(-z.imag(), z.real());
  const cplx g = std::exp(-z * z);
  const cplx out = z.real() >= 0.0 ? g * faddeeva(iz) : 2.0 - g * faddeeva(-iz);
  if (!std::isfinite(out.real()) || !std::isfinite(out.imag())) {
    throw ErfcDomainError(fmt::format("erfc({}, {}) overflows double range", z.real(), z.imag()));
  }
  return out;
}

}  // namespace modlab
